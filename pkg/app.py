#!/usr/bin/env python3
"""
Entry point for the truncated-evi command-line tool.

Parses the command line, configures logging and runs the selected command.
Errors are reported on stderr as a single ``CODE: message`` line.
"""

import sys
from typing import Optional, Sequence

from cli import parse_run_config, run
from config import LOGGING_CONFIG
from errors import ConfigError
from logging_utils import ErrorHandler, setup_exception_logging, setup_logging


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for truncated-evi.

    Args:
        argv: Command-line arguments without the program name (default sys.argv[1:])

    Returns:
        Exit status

    Exit Codes:
        0: Success
        1: Estimation, data or I/O error
        2: Configuration or usage error
    """
    logger = setup_logging(level=LOGGING_CONFIG["level"])
    setup_exception_logging(logger)
    handler = ErrorHandler(logger)

    try:
        config = parse_run_config(argv)
        if config.log_level:
            logger = setup_logging(level=config.log_level)
            handler = ErrorHandler(logger)
        return run(config)
    except KeyboardInterrupt:
        sys.stderr.write("interrupted\n")
        return 130
    except ConfigError as e:
        sys.stderr.write(handler.handle(e) + "\n")
        return 2
    except Exception as e:  # pylint: disable=broad-except
        sys.stderr.write(handler.handle(e) + "\n")
        return 1


if __name__ == '__main__':
    sys.exit(main())

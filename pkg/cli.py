"""
Command-Line Front End.

Subcommands:
    estimate         tail index (and optional extreme quantile) of a CSV sample
    curves           bias/RMSE curves of the Lynden-Bell and two-Hill estimators
    quantile-curves  bias/RMSE curves of the extreme quantile estimator
    clt              normality check of the normalized Lynden-Bell estimates
    constants        asymptotic constants of a model pair

Settings come from command-line flags and, optionally, a flat ``key = value``
file given with ``--config``; flags override file values. Keys use the flag
names with underscores (``model_x``, ``k_grid``, ``pn``, ...).
"""

import argparse
import configparser
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, FrozenSet, Mapping, NoReturn, Optional, Sequence, Tuple

from config import APP_INFO, SIMULATION_CONFIG
from data_io import format_constants_report, read_sample_csv, write_curve_csv, write_report_csv
from errors import ConfigError
from estimators import evi_lynden_bell, lynden_bell_survival, quantile_weissman
from experiments import ExperimentSpec, run_bias_rmse, run_clt_check, run_quantile_curve
from logging_utils import get_logger
from models import parse_model
from theory import TheoryConstants
from visualizers import CurvePlotScript

logger = get_logger(__name__)

_SECTION = "run"
_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# Keys accepted by every command.
_COMMON_KEYS: FrozenSet[str] = frozenset({"log_level"})

# command -> (required keys, optional keys)
COMMAND_KEYS: Dict[str, Tuple[FrozenSet[str], FrozenSet[str]]] = {
    "estimate": (frozenset({"input", "k"}), frozenset({"pn", "output"})),
    "curves": (
        frozenset({"model_x", "model_y", "output"}),
        frozenset({"n", "replicates", "seed", "k_grid", "workers", "emit_plot_script"}),
    ),
    "quantile-curves": (
        frozenset({"model_x", "model_y", "output"}),
        frozenset({"n", "replicates", "seed", "k_grid", "pn", "workers", "emit_plot_script"}),
    ),
    "clt": (
        frozenset({"model_x", "model_y", "k", "output"}),
        frozenset({"n", "replicates", "seed", "workers"}),
    ),
    "constants": (frozenset({"model_x", "model_y"}), frozenset({"rho1", "output"})),
}

ALL_KEYS: Tuple[str, ...] = (
    "model_x", "model_y", "n", "replicates", "k", "k_grid", "pn", "rho1", "seed",
    "input", "output", "emit_plot_script", "workers", "log_level",
)


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting on usage errors."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override its values")
    common.add_argument("--model-x", dest="model_x", help="law of the truncated variable, e.g. burr(10,4,1)")
    common.add_argument("--model-y", dest="model_y", help="law of the truncating variable, e.g. burr(10,2,1)")
    common.add_argument("--n", type=str, help="observed sample size")
    common.add_argument("--replicates", type=str, help="number of Monte Carlo replicates")
    common.add_argument("--k", type=str, help="number of top observations")
    common.add_argument("--k-grid", dest="k_grid", help="comma-separated k values, e.g. 10,20,30")
    common.add_argument("--pn", type=str, help="tail probability of the extreme quantile")
    common.add_argument("--rho1", type=str, help="second-order index of the truncated law (<= 0)")
    common.add_argument("--seed", type=str, help="base seed of the replicate streams")
    common.add_argument("--input", help="CSV sample with header x,y")
    common.add_argument("--output", help="output CSV path")
    common.add_argument("--emit-plot-script", dest="emit_plot_script", help="also write a pyqtgraph script here")
    common.add_argument("--workers", type=str, help="worker processes for the Monte Carlo harness")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")

    parser = _ArgumentParser(prog=APP_INFO["name"], description=APP_INFO["description"])
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_INFO['version']}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in COMMAND_KEYS:
        subparsers.add_parser(command, parents=[common], help=f"run the {command} command")
    return parser


def load_config_file(path: str) -> Dict[str, str]:
    """
    Read a flat ``key = value`` file (no section headers).

    Raises:
        ConfigError: If the file cannot be parsed
        OSError: If it cannot be read
    """
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"{path}: {' '.join(str(e).split())}", key="config") from e
    return {key.replace("-", "_"): value.strip() for key, value in parser.items(_SECTION)}


def _as_int(values: Mapping[str, Any], key: str, minimum: int) -> int:
    raw = values[key]
    try:
        number = int(str(raw).strip())
    except ValueError as e:
        raise ConfigError(f"{key} must be an integer, got {raw!r}", key=key) from e
    if number < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {number}", key=key)
    return number


def _as_float(values: Mapping[str, Any], key: str) -> float:
    raw = values[key]
    try:
        return float(str(raw).strip())
    except ValueError as e:
        raise ConfigError(f"{key} must be a number, got {raw!r}", key=key) from e


def _as_grid(values: Mapping[str, Any], key: str) -> Tuple[int, ...]:
    raw = str(values[key])
    try:
        grid = tuple(int(piece) for piece in raw.split(",") if piece.strip())
    except ValueError as e:
        raise ConfigError(f"{key} must be a comma-separated list of integers, got {raw!r}", key=key) from e
    if not grid:
        raise ConfigError(f"{key} must not be empty", key=key)
    return grid


@dataclass(frozen=True)
class RunConfig:
    """
    Validated settings of one command.

    Only the fields used by ``command`` are set; the others stay None.
    """

    command: str
    model_x: Optional[str] = None
    model_y: Optional[str] = None
    input_path: Optional[str] = None
    k: Optional[int] = None
    k_grid: Optional[Tuple[int, ...]] = None
    p_n: Optional[float] = None
    rho1: Optional[float] = None
    n: Optional[int] = None
    replicates: Optional[int] = None
    seed: Optional[int] = None
    output_path: Optional[str] = None
    emit_plot_script: Optional[str] = None
    workers: Optional[int] = None
    log_level: Optional[str] = None

    @classmethod
    def from_mapping(cls, command: str, values: Mapping[str, Any]) -> "RunConfig":
        """
        Validate raw settings for ``command``.

        Simulation commands fall back to the configured defaults for n,
        replicates and seed, and quantile-curves to the default p_n.

        Raises:
            ConfigError: Unknown command, missing or unexpected key, or bad value (naming the key)
        """
        if command not in COMMAND_KEYS:
            raise ConfigError(f"unknown command {command!r}", key="command")
        required, optional = COMMAND_KEYS[command]
        present = {key for key, value in values.items() if value is not None}
        unexpected = sorted(present - required - optional - _COMMON_KEYS)
        if unexpected:
            raise ConfigError(f"unexpected key {unexpected[0]!r} for command {command}", key=unexpected[0])
        missing = sorted(required - present)
        if missing:
            raise ConfigError(f"missing required key {missing[0]!r} for command {command}", key=missing[0])

        settings: Dict[str, Any] = {key: values[key] for key in present}
        if command in ("curves", "quantile-curves", "clt"):
            settings.setdefault("n", SIMULATION_CONFIG["n"])
            settings.setdefault("replicates", SIMULATION_CONFIG["replicates"])
            settings.setdefault("seed", SIMULATION_CONFIG["seed"])
        if command == "quantile-curves":
            settings.setdefault("pn", SIMULATION_CONFIG["p_n"])

        fields: Dict[str, Any] = {"command": command}
        for key in ("model_x", "model_y", "emit_plot_script"):
            if key in settings:
                fields[key] = str(settings[key])
        if "log_level" in settings:
            level = str(settings["log_level"]).strip().upper()
            if level not in _LOG_LEVELS:
                raise ConfigError(f"log_level must be one of {', '.join(_LOG_LEVELS)}, got {level!r}", key="log_level")
            fields["log_level"] = level
        if "input" in settings:
            fields["input_path"] = str(settings["input"])
        if "output" in settings:
            fields["output_path"] = str(settings["output"])
        if "k" in settings:
            fields["k"] = _as_int(settings, "k", 1)
        if "n" in settings:
            fields["n"] = _as_int(settings, "n", 2)
        if "replicates" in settings:
            fields["replicates"] = _as_int(settings, "replicates", 1)
        if "seed" in settings:
            fields["seed"] = _as_int(settings, "seed", 0)
        if "workers" in settings:
            fields["workers"] = _as_int(settings, "workers", 1)
        if "k_grid" in settings:
            fields["k_grid"] = _as_grid(settings, "k_grid")
        if "pn" in settings:
            fields["p_n"] = _as_float(settings, "pn")
            if not 0 < fields["p_n"] < 1:
                raise ConfigError(f"pn must lie in (0, 1), got {fields['p_n']}", key="pn")
        if "rho1" in settings:
            fields["rho1"] = _as_float(settings, "rho1")
        return cls(**fields)


def parse_run_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Parse command-line arguments (and the optional config file) into a RunConfig.

    Raises:
        ConfigError: On usage or validation errors
    """
    args = build_parser().parse_args(argv)
    values: Dict[str, Any] = {}
    if args.config:
        values.update(load_config_file(args.config))
    for key in ALL_KEYS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            values[key] = flag_value
    return RunConfig.from_mapping(args.command, values)


def _emit(text: str) -> None:
    sys.stdout.write(text + "\n")


def cmd_estimate(config: RunConfig) -> int:
    """
    Estimate the tail index of a CSV sample at the k-th top observation.

    Prints the estimate with the exceedance bookkeeping and, when p_n is
    given, the extreme quantile estimate.
    """
    assert config.input_path is not None and config.k is not None
    sample = read_sample_csv(config.input_path)
    estimate = evi_lynden_bell(sample, config.k)
    report: Dict[str, Any] = {
        "n": sample.n,
        "k": estimate.k,
        "threshold": estimate.threshold,
        "exceedances": sample.count_above(estimate.threshold),
        "tail_mass": lynden_bell_survival(sample, estimate.threshold),
        "degenerate_point": sample.degenerate_point,
        "gamma": estimate.value,
    }
    if config.p_n is not None:
        report["pn"] = config.p_n
        report["quantile"] = quantile_weissman(sample, config.k, config.p_n)
    _emit(format_constants_report(report))
    if config.output_path:
        write_report_csv(report, config.output_path)
    return 0


def _experiment_spec(config: RunConfig) -> ExperimentSpec:
    assert config.model_x is not None and config.model_y is not None
    assert config.n is not None and config.replicates is not None and config.seed is not None
    return ExperimentSpec(
        model_x=parse_model(config.model_x),
        model_y=parse_model(config.model_y),
        n=config.n,
        replicates=config.replicates,
        k_grid=config.k_grid or (),
        p_n=config.p_n,
        seed=config.seed,
    )


def _write_curves(config: RunConfig, spec: ExperimentSpec, runner: Callable[..., Any]) -> int:
    assert config.output_path is not None
    result = runner(spec, workers=config.workers)
    write_curve_csv(result, config.output_path)
    if config.emit_plot_script:
        title = f"{spec.model_x.literal} truncated by {spec.model_y.literal}, n={spec.n}"
        CurvePlotScript(result, title).write(config.emit_plot_script)
    _emit(f"wrote {len(result.cells)} rows to {config.output_path}")
    return 0


def cmd_curves(config: RunConfig) -> int:
    """Write bias/RMSE curves of the tail-index estimators."""
    return _write_curves(config, _experiment_spec(config), run_bias_rmse)


def cmd_quantile_curves(config: RunConfig) -> int:
    """Write bias/RMSE curves of x_hat / x_pn - 1."""
    return _write_curves(config, _experiment_spec(config), run_quantile_curve)


def cmd_clt(config: RunConfig) -> int:
    """Run the normality check and write its one-row report."""
    assert config.model_x is not None and config.model_y is not None and config.k is not None
    assert config.n is not None and config.replicates is not None and config.seed is not None
    assert config.output_path is not None
    report = run_clt_check(
        parse_model(config.model_x),
        parse_model(config.model_y),
        n=config.n,
        k=config.k,
        replicates=config.replicates,
        seed=config.seed,
        workers=config.workers,
    )
    write_report_csv(report.as_report(), config.output_path)
    _emit(format_constants_report(report.as_report()))
    return 0


def cmd_constants(config: RunConfig) -> int:
    """Print p, alpha, m (given rho1), s^2 and c_0..c_2 of a model pair."""
    assert config.model_x is not None and config.model_y is not None
    constants = TheoryConstants.from_models(parse_model(config.model_x), parse_model(config.model_y), config.rho1)
    report = constants.as_report()
    _emit(format_constants_report(report))
    if config.output_path:
        write_report_csv(report, config.output_path)
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "estimate": cmd_estimate,
    "curves": cmd_curves,
    "quantile-curves": cmd_quantile_curves,
    "clt": cmd_clt,
    "constants": cmd_constants,
}


def run(config: RunConfig) -> int:
    """Execute the command named by ``config``."""
    logger.info("running %s", config.command)
    return COMMANDS[config.command](config)


"""
Configuration settings for the truncated-evi toolkit.

This module contains all configurable constants and defaults used throughout
the library and the command-line front end: simulation defaults, quadrature
tolerances, rejection sampler budgets, CSV layouts and plot styling.
"""

from typing import Any, Dict, List

# Application Metadata
APP_INFO: Dict[str, str] = {
    "name": "truncated-evi",
    "version": "1.0.0",
    "description": "Tail-index and extreme-quantile estimation for randomly right-truncated heavy-tailed data",
}

# Monte Carlo Simulation Defaults
SIMULATION_CONFIG: Dict[str, Any] = {
    "n": 200,
    "replicates": 2000,
    "p_n": 0.03,
    "seed": 20160817,
    "k_grid_start": 10,
    "k_grid_stop": 150,
    "k_grid_step": 5,
    "workers": 1,
    "chunk_size": 50,  # replicates per worker task
}

# Rejection Sampling of Truncated Pairs
GENERATION_CONFIG: Dict[str, Any] = {
    "min_draw_budget": 1_000_000,
    "budget_factor": 1000,
    "overdraw_factor": 1.25,
    "min_batch": 64,
    "max_batch": 1_000_000,
}

# Adaptive Quadrature
QUADRATURE_CONFIG: Dict[str, Any] = {
    "epsabs": 1e-11,
    "epsrel": 1e-10,
    "limit": 500,
    "target_abstol": 1e-8,  # accuracy promised by nontruncation_prob
}

# CLT Report Bands
CLT_CONFIG: Dict[str, float] = {
    "variance_ratio_low": 0.75,
    "variance_ratio_high": 1.25,
    "ks_threshold": 0.06,
}

# CSV Layouts
CSV_CONFIG: Dict[str, Any] = {
    "sample_columns": ["x", "y"],
    "curve_columns": ["k", "estimator", "replicates", "failures", "mean", "bias", "variance", "rmse"],
}

# Plot Script Styling
COLORS: Dict[str, Any] = {
    "plot_bg": (20, 20, 30),
    "grid_alpha": 0.3,
    "zero_line": (80, 80, 100),
    "estimators": {
        "lynden_bell_hill": (0, 200, 255),
        "gardes_stupfler": (255, 170, 0),
        "hill": (180, 180, 180),
    },
}

PLOT_CONFIG: Dict[str, Any] = {
    "window_size": (1100, 450),
    "line_width": 2,
    # plain for the Lynden-Bell estimator, dashed for the baseline
    "line_styles": {
        "lynden_bell_hill": "SolidLine",
        "gardes_stupfler": "DashLine",
        "hill": "DotLine",
    },
}

# Machine-readable error codes
ERROR_CODES: Dict[str, str] = {
    "unexpected": "E_UNEXPECTED",
    "io": "E_IO",
}

# Logging
LOGGING_CONFIG: Dict[str, str] = {
    "level": "WARNING",
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "datefmt": "%Y-%m-%d %H:%M:%S",
}


def get_default_k_grid(n: int) -> List[int]:
    """
    Return the default grid of exceedance counts for a sample of size n.

    The grid is {10, 15, ..., 150} restricted to the admissible range [1, n-1].
    For very small samples where nothing of the default grid survives, every
    admissible k is returned.

    Args:
        n: Observed sample size

    Returns:
        Strictly increasing list of integers in [1, n-1]
    """
    start = int(SIMULATION_CONFIG["k_grid_start"])
    stop = int(SIMULATION_CONFIG["k_grid_stop"])
    step = int(SIMULATION_CONFIG["k_grid_step"])
    grid = [k for k in range(start, stop + 1, step) if 1 <= k <= n - 1]
    if not grid:
        grid = list(range(1, n))
    return grid

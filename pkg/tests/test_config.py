"""Tests for configuration defaults."""

from config import CSV_CONFIG, PLOT_CONFIG, SIMULATION_CONFIG, get_default_k_grid


def test_default_grid():
    assert get_default_k_grid(200) == list(range(10, 151, 5))


def test_default_grid_is_clipped():
    assert get_default_k_grid(40) == [10, 15, 20, 25, 30, 35]


def test_default_grid_tiny_sample():
    assert get_default_k_grid(3) == [1, 2]


def test_simulation_defaults():
    assert SIMULATION_CONFIG["n"] == 200
    assert SIMULATION_CONFIG["replicates"] == 2000
    assert SIMULATION_CONFIG["seed"] >= 0


def test_every_default_estimator_has_a_line_style():
    assert set(PLOT_CONFIG["line_styles"]) >= {"lynden_bell_hill", "gardes_stupfler"}
    assert CSV_CONFIG["sample_columns"] == ["x", "y"]

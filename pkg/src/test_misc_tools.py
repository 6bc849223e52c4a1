"""
Unit tests for the helpers in misc_tools.py
"""
import numpy as np
import pandas as pd
import pytest

import misc_tools


def test_write_table_is_byte_stable(tmp_path):
    """Floats survive the CSV with full precision and reruns give the same bytes."""
    df = pd.DataFrame({"k": [1, 2], "value": [np.pi, 1.0 / 3.0]})
    path = misc_tools.write_table(df, tmp_path / "nested" / "table.csv")
    first = path.read_bytes()
    assert b"\r" not in first
    back = pd.read_csv(path, float_precision="round_trip")
    assert back["value"].tolist() == [np.pi, 1.0 / 3.0]
    misc_tools.write_table(df, path)
    assert path.read_bytes() == first


def test_write_table_names_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="table.csv"):
        misc_tools.write_table(pd.DataFrame({"a": [1]}), blocker / "table.csv")


def test_fit_power_law_recovers_exponents():
    r = np.array([20.0, 30.0, 40.0, 20.0, 30.0, 40.0])
    sigma = np.array([0.05, 0.05, 0.05, 0.1, 0.1, 0.1])
    df = pd.DataFrame({"r": r, "sigma": sigma, "y": -3.0 * r ** 1.5 * sigma ** 0.5})
    fit = misc_tools.fit_power_law(df, "y", ["r", "sigma"])
    assert fit.params["r"] == pytest.approx(1.5, abs=1e-10)
    assert fit.params["sigma"] == pytest.approx(0.5, abs=1e-10)
    assert fit.params["const"] == pytest.approx(np.log(3.0), abs=1e-10)


def test_fit_power_law_drops_constant_columns():
    df = pd.DataFrame({"r": [1.0, 2.0, 4.0], "sigma": [0.1, 0.1, 0.1], "y": [3.0, 12.0, 48.0]})
    fit = misc_tools.fit_power_law(df, "y", ["r", "sigma"])
    assert "sigma" not in fit.params.index
    assert fit.params["r"] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        misc_tools.fit_power_law(df, "y", ["sigma"])


def test_relative_error_and_rng():
    assert misc_tools.relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert misc_tools.relative_error(1e-3, 0.0, floor=1.0) == pytest.approx(1e-3)
    draws = misc_tools.seeded_rng(5).uniform(size=3)
    assert np.array_equal(draws, misc_tools.seeded_rng(5).uniform(size=3))

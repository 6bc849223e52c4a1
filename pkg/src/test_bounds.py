"""
Unit tests for the eigenvalue-sum bounds in bounds.py

Following tests are included:
    - domain geometry validation and the boundary-layer estimate of a box
    - lower bound on eigenvalue sums in both regimes, its leading/correction split,
      its growth in k and its scaling with the volume
    - positivity and small-volume thresholds
    - Weyl asymptotics of single eigenvalues and sums
    - leading-order upper bound and the estimator of its constant
    - the per-rank bound table
"""
import numpy as np
import pandas as pd
import pytest

import bounds
from bounds import DomainGeometry
from coremath import SpectralParams

HALF = SpectralParams(n=1, s=0.5)
UNIT_INTERVAL = DomainGeometry.box([np.pi])


def test_box_geometry():
    """A box carries its exact volume and the layer constants 2 sum |Omega|/L_i."""
    geom = DomainGeometry.box([2.0, 3.0])
    assert geom.volume == pytest.approx(6.0)
    assert geom.layer_constant == pytest.approx(2.0 * (3.0 + 2.0))
    assert geom.layer_max_width == pytest.approx(1.0)
    assert geom.is_box
    assert geom.layer_volume(0.5) == pytest.approx(6.0 - 1.0 * 2.0)
    assert geom.check_layer_bound()
    assert UNIT_INTERVAL.layer_volume(0.1) == pytest.approx(0.2)


def test_geometry_validation():
    with pytest.raises(ValueError):
        DomainGeometry(n=1, volume=0.0)
    with pytest.raises(ValueError):
        DomainGeometry(n=2, volume=6.0, box_lengths=(2.0, 2.0))
    with pytest.raises(ValueError):
        DomainGeometry(n=2, volume=4.0, box_lengths=(4.0,))
    with pytest.raises(ValueError):
        DomainGeometry(n=1, volume=1.0, layer_constant=-1.0)
    with pytest.raises(ValueError):
        DomainGeometry(n=1, volume=1.0).layer_volume(0.1)


def test_lower_bound_sum_examples():
    """For Omega = (0, pi) and s = 1/2 the main bound collapses to k^2 (ln k - 1/2)."""
    first = bounds.lower_bound_sum(HALF, UNIT_INTERVAL, 1)
    assert first.regime == bounds.REGIME_MAIN
    assert first.value == pytest.approx(-0.5, rel=1e-12)

    third = bounds.lower_bound_sum(HALF, UNIT_INTERVAL, 3)
    assert third.value == pytest.approx(9.0 * (np.log(3.0) - 0.5), rel=1e-12)
    assert third.value == pytest.approx(5.38751, abs=1e-5)

    large = DomainGeometry(n=1, volume=4.0 * np.pi)
    universal = bounds.lower_bound_sum(HALF, large, 1)
    assert universal.regime == bounds.REGIME_UNIVERSAL
    assert universal.value == pytest.approx(-2.0, rel=1e-12)


def test_lower_bound_sum_rejects_bad_ranks():
    for k in (0, -3, 2.5):
        with pytest.raises(ValueError):
            bounds.lower_bound_sum(HALF, UNIT_INTERVAL, k)
    with pytest.raises(ValueError):
        bounds.lower_bound_sum(SpectralParams(n=2, s=0.5), UNIT_INTERVAL, 3)


def test_regime_switches_at_threshold():
    geom = DomainGeometry(n=1, volume=4.0 * np.pi)
    assert bounds.lower_bound_threshold(HALF, geom) == pytest.approx(4.0)
    assert bounds.main_regime_onset(HALF, geom) == 4
    assert bounds.lower_bound_sum(HALF, geom, 3).regime == bounds.REGIME_UNIVERSAL
    at_onset = bounds.lower_bound_sum(HALF, geom, 4)
    assert at_onset.regime == bounds.REGIME_MAIN
    # at k = k_0 the main bound is P k_0^{1+2s/n} (-n/(n+2s))
    expected = bounds.main_prefactor(HALF, geom) * 16.0 * (-0.5)
    assert at_onset.value == pytest.approx(expected, rel=1e-12)


def test_universal_bound_is_below_main_bound():
    """Past the threshold the main bound is the sharper one."""
    for volume in (0.5, np.pi, 10.0):
        for n, s in ((1, 0.3), (2, 0.5), (3, 0.8)):
            params = SpectralParams(n=n, s=s)
            geom = DomainGeometry(n=n, volume=volume)
            universal = bounds.universal_lower_bound(params, geom)
            start = bounds.main_regime_onset(params, geom)
            for k in range(start, start + 50):
                assert bounds.lower_bound_sum(params, geom, k).value >= universal - 1e-10 * abs(universal)


def test_remark26_split():
    split = bounds.remark26_split(HALF, UNIT_INTERVAL, 3)
    assert split.leading == pytest.approx(9.0 * np.log(3.0), rel=1e-12)
    assert split.correction == pytest.approx(-4.5, rel=1e-12)

    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(1, 4))
        params = SpectralParams(n=n, s=float(rng.uniform(0.05, 0.95)))
        geom = DomainGeometry(n=n, volume=float(rng.uniform(0.1, 5.0)))
        k = bounds.main_regime_onset(params, geom) + int(rng.integers(1, 1000))
        split = bounds.remark26_split(params, geom, k)
        value = bounds.lower_bound_sum(params, geom, k).value
        assert split.leading + split.correction == pytest.approx(value, rel=1e-12, abs=1e-12)


def test_lower_bound_increases_in_k():
    """Once ln(k / k_0) >= 1 the main bound grows strictly with k."""
    for n, s in ((1, 0.5), (2, 0.25), (3, 0.9)):
        params = SpectralParams(n=n, s=s)
        for volume in (0.5, np.pi, 40.0):
            geom = DomainGeometry(n=n, volume=volume)
            threshold = bounds.lower_bound_threshold(params, geom)
            start = max(bounds.main_regime_onset(params, geom), int(np.ceil(np.e * threshold)))
            values = [bounds.lower_bound_sum(params, geom, k).value for k in range(start, start + 200)]
            assert np.all(np.diff(values) > 0), f"not increasing for n={n}, s={s}, |Omega|={volume}"


def test_lower_bound_scale_coherence():
    """Doubling |Omega| doubles k_0 and scales the prefactor by 2^{-2s/n}."""
    for n, s in ((1, 0.5), (2, 0.3)):
        params = SpectralParams(n=n, s=s)
        geom = DomainGeometry(n=n, volume=3.0)
        doubled = DomainGeometry(n=n, volume=6.0)
        assert bounds.lower_bound_threshold(params, doubled) == pytest.approx(
            2.0 * bounds.lower_bound_threshold(params, geom), rel=1e-14
        )
        scale = 2.0 ** (-params.ratio)
        prefactor = bounds.main_prefactor(params, geom)
        assert bounds.main_prefactor(params, doubled) == pytest.approx(prefactor * scale, rel=1e-12)

        threshold = bounds.lower_bound_threshold(params, geom)
        for k in range(bounds.main_regime_onset(params, doubled), 60):
            expected = (
                prefactor * scale * k ** (1.0 + params.ratio)
                * (np.log(k / threshold) - np.log(2.0) - params.n / params.exponent)
            )
            assert bounds.lower_bound_sum(params, doubled, k).value == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_thresholds():
    assert bounds.positivity_threshold(HALF, UNIT_INTERVAL) == pytest.approx(np.exp(0.5))
    assert bounds.positivity_threshold(HALF, DomainGeometry(n=1, volume=2.0 * np.pi)) == pytest.approx(
        2.0 * np.exp(0.5)
    )
    assert bounds.small_volume_threshold(HALF) == pytest.approx(np.pi * np.exp(-0.5))
    assert bounds.small_volume_threshold(SpectralParams(n=2, s=0.5)) == pytest.approx(
        4.0 * np.pi * np.exp(-2.0 / 3.0)
    )
    assert bounds.small_volume_threshold(HALF) == pytest.approx(1.90547, abs=1e-5)


def test_lower_bound_positive_above_positivity_threshold():
    for volume in (0.3, np.pi, 12.0):
        geom = DomainGeometry(n=1, volume=volume)
        threshold = bounds.positivity_threshold(HALF, geom)
        k = int(np.floor(threshold)) + 1
        assert bounds.lower_bound_sum(HALF, geom, k).value > 0


def test_weyl_asymptotics():
    assert bounds.weyl_eigenvalue(HALF, UNIT_INTERVAL, 10) == pytest.approx(20.0 * np.log(10.0))
    assert bounds.weyl_eigenvalue(HALF, UNIT_INTERVAL, 2) == pytest.approx(4.0 * np.log(2.0))
    assert bounds.weyl_sum(HALF, UNIT_INTERVAL, 10) == pytest.approx(100.0 * np.log(10.0))
    with pytest.raises(ValueError):
        bounds.weyl_sum(HALF, UNIT_INTERVAL, 1)


def test_weyl_sum_factors_into_classical_and_log_parts():
    for n, s in ((1, 0.5), (2, 0.25), (3, 0.7)):
        params = SpectralParams(n=n, s=s)
        geom = DomainGeometry(n=n, volume=2.0)
        k = np.array([2, 10, 1000])
        product = bounds.classical_weyl_sum(params, geom, k) * bounds.log_weyl_sum(n, k)
        assert np.allclose(product, bounds.weyl_sum(params, geom, k), rtol=1e-12)


def test_lower_bound_approaches_weyl_sum():
    """|lower/weyl - 1| <= (|ln((2pi)^n / (omega_n |Omega|))| + 1) / ln k."""
    for volume in (0.5, np.pi, 20.0):
        geom = DomainGeometry(n=1, volume=volume)
        allowance = abs(np.log(2.0 * np.pi / (2.0 * volume))) + 1.0
        start = max(2, bounds.main_regime_onset(HALF, geom))
        for k in (start + 10, 10 ** 3, 10 ** 5, 10 ** 7):
            ratio = bounds.lower_bound_sum(HALF, geom, k).value / bounds.weyl_sum(HALF, geom, k)
            assert abs(ratio - 1.0) <= allowance / np.log(k)


def test_weyl_eigenvalues_sum_to_weyl_sum():
    k = 10 ** 5
    ranks = np.arange(2, k + 1)
    partial = np.sum(bounds.weyl_eigenvalue(HALF, UNIT_INTERVAL, ranks))
    ratio = partial / bounds.weyl_sum(HALF, UNIT_INTERVAL, k)
    assert abs(ratio - 1.0) < 1.0 / np.log(k)


def test_upper_bound_sum():
    assert bounds.upper_bound_sum(HALF, UNIT_INTERVAL, 10, 0.0) == pytest.approx(100.0 * np.log(10.0))
    assert bounds.upper_bound_sum(HALF, UNIT_INTERVAL, 10, 3.0) == pytest.approx(530.259, abs=1e-3)
    with pytest.raises(ValueError):
        bounds.upper_bound_sum(HALF, UNIT_INTERVAL, 1, 3.0)
    with pytest.raises(ValueError):
        bounds.upper_bound_sum(HALF, UNIT_INTERVAL, 10, -1.0)
    with pytest.raises(ValueError):
        bounds.upper_bound_sum(HALF, DomainGeometry(n=1, volume=np.pi), 10, 0.0)


def _leading_sums(k_max, extra=0.0):
    k = np.arange(1, k_max + 1, dtype=float)
    return k ** 2 * np.log(k) + extra * k ** 2


def test_estimate_upper_constant_on_constructed_spectra():
    exact = np.diff(_leading_sums(50), prepend=0.0)
    assert bounds.estimate_upper_constant(exact, HALF, UNIT_INTERVAL) == pytest.approx(0.0, abs=1e-9)

    shifted = np.diff(_leading_sums(50, extra=5.0), prepend=0.0)
    assert bounds.estimate_upper_constant(shifted, HALF, UNIT_INTERVAL) == pytest.approx(5.0, rel=1e-9)


def test_estimate_upper_constant_errors():
    with pytest.raises(ValueError):
        bounds.estimate_upper_constant([], HALF, UNIT_INTERVAL)
    with pytest.raises(ValueError):
        bounds.estimate_upper_constant(np.arange(5.0), HALF, UNIT_INTERVAL)
    with pytest.raises(ValueError):
        bounds.estimate_upper_constant(np.arange(20.0)[::-1], HALF, UNIT_INTERVAL)


def test_bound_report_columns():
    report = bounds.bound_report(HALF, UNIT_INTERVAL, 1)
    assert np.isnan(report.weyl_k) and np.isnan(report.weyl_sum)
    assert np.isnan(report.upper_leading) and np.isnan(report.upper_bound)
    assert report.dominates_lower_bound() is None

    report = bounds.bound_report(HALF, UNIT_INTERVAL, 10, computed_sum=400.0, upper_constant=3.0)
    # the leading column never carries the constant
    assert report.upper_leading == pytest.approx(100.0 * np.log(10.0))
    assert report.upper_bound == pytest.approx(530.259, abs=1e-3)
    assert report.dominates_lower_bound() is True
    assert report.positivity_threshold == pytest.approx(np.exp(0.5))


def test_bound_table():
    table = bounds.bound_table(HALF, UNIT_INTERVAL, 5)
    assert list(table.columns) == bounds.BOUND_COLUMNS
    assert table["k"].tolist() == [1, 2, 3, 4, 5]
    assert (table["regime"] == bounds.REGIME_MAIN).all()
    assert table.loc[2, "lower_bound"] == pytest.approx(5.38751, abs=1e-5)
    assert table["upper_leading"].isna().tolist() == [True, False, False, False, False]

    spectrum = (np.arange(1, 11) ** 2).astype(float)
    with_sums = bounds.bound_table(HALF, UNIT_INTERVAL, 5, spectrum=spectrum)
    expected = pd.Series([1.0, 5.0, 14.0, 30.0, 55.0], name="computed_sum")
    pd.testing.assert_series_equal(with_sums["computed_sum"], expected)
    with pytest.raises(ValueError):
        bounds.bound_table(HALF, UNIT_INTERVAL, 20, spectrum=spectrum)


def test_bound_table_upper_bound_column():
    plain = bounds.bound_table(HALF, UNIT_INTERVAL, 5)
    assert "upper_bound" not in plain.columns
    table = bounds.bound_table(HALF, UNIT_INTERVAL, 5, upper_constant=3.0)
    assert list(table.columns) == bounds.BOUND_COLUMNS + ["upper_bound"]
    pd.testing.assert_series_equal(table["upper_leading"], plain["upper_leading"])
    k = table["k"].to_numpy(dtype=float)[1:]
    assert np.allclose(table["upper_bound"].to_numpy()[1:] - table["upper_leading"].to_numpy()[1:], 3.0 * k ** 2)

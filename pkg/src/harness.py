"""
Command line entry point and experiment orchestration.

    speclog bounds|solve|verify|asymptotics|cutoff --config <file> [--out <dir>] [--seed <u64>]

Each command reads one flat JSON experiment config (see
`data/manual/default_config.json`) and writes plot-ready CSV tables or a JSON
verification report into the output directory. Exit status: 0 when everything
ran (and, for `verify`, every check passed), 1 when a verification check
failed, 2 on configuration or infrastructure errors.
"""
import argparse
import datetime
import json
import logging
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
import scipy
import statsmodels
from scipy import integrate
from scipy.special import gamma

import bounds
import config
import coremath
import form_cache
import misc_tools
import solver

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INFRASTRUCTURE = 2

ASYMPTOTIC_KS = (1_000, 10_000, 100_000, 1_000_000)
TREND_KS = (8, 16, 32, 64)

QUAD_KEYS = (
    "cutoff_radius", "cutoff_factor", "nodes_per_panel", "panels_per_half_period",
    "grading_levels", "tail_order", "singularity_guard", "tail_tolerance",
)
CONFIG_KEYS = {
    "n", "s", "box_lengths", "volume", "layer_constant", "layer_max_width",
    "basis_size", "k_max", "output_dir", "seed", "symbol", "symbol_order",
    "upper_constant", "r_list", "sigma_list", "probe_points", *QUAD_KEYS,
}


def _require(raw, key, path):
    if key not in raw:
        raise ValueError(f"config {path} is missing the key {key!r}")
    return raw[key]


@dataclass
class ExperimentConfig:
    params: coremath.SpectralParams
    geom: bounds.DomainGeometry
    basis_size: int
    k_max: int
    output_dir: Path
    seed: int
    quad_options: dict = field(default_factory=dict)
    symbol: str = solver.FRACTIONAL_LOG
    symbol_order: Optional[float] = None
    upper_constant: float = 0.0
    r_list: tuple = (20.0, 30.0, 40.0)
    sigma_list: tuple = (0.02, 0.05, 0.1)
    probe_points: int = 2 ** 16

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if self.basis_size < 2:
            raise ValueError(f"basis_size must be at least 2, got {self.basis_size}")
        if self.k_max < 1 or 2 * self.k_max > self.basis_size:
            raise ValueError(
                f"k_max={self.k_max} must lie in [1, basis_size/2 = {self.basis_size // 2}]"
            )
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.symbol not in solver.SYMBOL_TAGS:
            raise ValueError(f"unknown symbol {self.symbol!r}")
        if self.symbol == solver.FRACTIONAL and self.symbol_order is None:
            raise ValueError("symbol 'fractional' needs symbol_order")
        unknown = set(self.quad_options) - set(QUAD_KEYS)
        if unknown:
            raise ValueError(f"unknown quadrature options {sorted(unknown)}")

    @classmethod
    def from_json(cls, path, output_dir=None, seed=None):
        """Read a flat JSON config; `output_dir` and `seed` override the file."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as err:
            raise OSError(f"could not read config {path}: {err}") from err
        if not isinstance(raw, dict):
            raise ValueError(f"config {path} must be a JSON object")
        unknown = set(raw) - CONFIG_KEYS
        if unknown:
            raise ValueError(f"config {path} has unknown keys {sorted(unknown)}")

        params = coremath.SpectralParams(n=_require(raw, "n", path), s=_require(raw, "s", path))
        if "box_lengths" in raw:
            geom = bounds.DomainGeometry.box(raw["box_lengths"])
        else:
            geom = bounds.DomainGeometry(
                n=params.n,
                volume=_require(raw, "volume", path),
                layer_constant=raw.get("layer_constant"),
                layer_max_width=raw.get("layer_max_width"),
            )
        if geom.n != params.n:
            raise ValueError(f"config {path}: n={params.n} but the box has {geom.n} lengths")

        return cls(
            params=params,
            geom=geom,
            basis_size=int(_require(raw, "basis_size", path)),
            k_max=int(_require(raw, "k_max", path)),
            output_dir=Path(output_dir or raw.get("output_dir", config.OUTPUT_DIR)),
            seed=int(seed if seed is not None else raw.get("seed", config.DEFAULT_SEED)),
            quad_options={key: raw[key] for key in QUAD_KEYS if key in raw},
            symbol=raw.get("symbol", solver.FRACTIONAL_LOG),
            symbol_order=raw.get("symbol_order"),
            upper_constant=float(raw.get("upper_constant", 0.0)),
            r_list=tuple(float(r) for r in raw.get("r_list", cls.r_list)),
            sigma_list=tuple(float(sigma) for sigma in raw.get("sigma_list", cls.sigma_list)),
            probe_points=int(raw.get("probe_points", cls.probe_points)),
        )

    def ensure_output_dir(self):
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise OSError(f"could not create output directory {self.output_dir}: {err}") from err
        if not os.access(self.output_dir, os.W_OK):
            raise OSError(f"output directory {self.output_dir} is not writable")
        return self.output_dir

    def basis(self, size=None):
        """Sine basis of `size` functions (default basis_size) on the configured box."""
        size = self.basis_size if size is None else int(size)
        if not self.geom.is_box:
            raise ValueError("solver commands need a config with box_lengths")
        if self.geom.n == 1:
            return solver.GalerkinBasis.for_box(self.geom, size)
        max_index = math.ceil(size ** (1.0 / self.geom.n))
        return solver.GalerkinBasis.for_box(self.geom, max_index, size=size)

    def quadrature(self, basis):
        options = dict(self.quad_options)
        cutoff = options.pop("cutoff_radius", None)
        factor = options.pop("cutoff_factor", None)
        if cutoff is not None:
            return solver.QuadratureConfig(cutoff_radius=float(cutoff), **options)
        return solver.QuadratureConfig.for_basis(basis, factor=factor, **options)

    @property
    def quad(self):
        return self.quadrature(self.basis())

    def echo(self):
        return {
            "n": self.params.n,
            "s": self.params.s,
            "volume": self.geom.volume,
            "box_lengths": None if self.geom.box_lengths is None else list(self.geom.box_lengths),
            "layer_constant": self.geom.layer_constant,
            "layer_max_width": self.geom.layer_max_width,
            "basis_size": self.basis_size,
            "k_max": self.k_max,
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "quadrature": dict(sorted(self.quad_options.items())),
            "symbol": self.symbol,
            "symbol_order": self.symbol_order,
            "upper_constant": self.upper_constant,
            "r_list": list(self.r_list),
            "sigma_list": list(self.sigma_list),
            "probe_points": self.probe_points,
        }


########################################################################################
## Commands
########################################################################################

def cmd_bounds(cfg):
    df = bounds.bound_table(cfg.params, cfg.geom, cfg.k_max, upper_constant=cfg.upper_constant)
    path = misc_tools.write_table(df, cfg.output_dir / "bounds.csv")
    logger.info("wrote %d bound rows to %s", len(df), path)
    return path


def cmd_solve(cfg):
    """Assemble (or load) the form matrix, solve, write spectrum.csv next to the cache."""
    basis = cfg.basis()
    quad = cfg.quadrature(basis)
    matrix, cache, hit = form_cache.cached_assembly(
        basis, cfg.params, quad, cfg.output_dir, cfg.symbol, order=cfg.symbol_order,
    )
    if hit:
        logger.info("cache hit for %s, assembly skipped", cache.name)
    spectrum = solver.solve_spectrum(matrix)
    df = pd.DataFrame({
        "index": np.arange(1, spectrum.basis_size + 1),
        "value": spectrum.eigenvalues,
    })
    path = misc_tools.write_table(df, cfg.output_dir / "spectrum.csv")
    logger.info("wrote %d eigenvalues to %s", spectrum.basis_size, path)
    return path, cache


def weyl_sum_consistency(params, geom, k):
    """sum_{j=2}^k weyl_eigenvalue(j) / weyl_sum(k)."""
    ks = np.arange(2, int(k) + 1)
    return float(np.sum(bounds.weyl_eigenvalue(params, geom, ks)) / bounds.weyl_sum(params, geom, k))


def asymptotics_table(params, geom, ks=ASYMPTOTIC_KS):
    rho = 1.0 + params.ratio
    rows = []
    for k in ks:
        ratio = coremath.karamata_sum_ratio(2.0, 1.0, k)
        bound = 1.2 / np.log(k)
        rows.append({
            "k": int(k),
            "ratio": ratio,
            "bound": bound,
            "within_bound": bool(abs(ratio - 1.0) <= bound),
            "weyl_order_ratio": coremath.karamata_sum_ratio(rho, gamma(rho), k),
            "weyl_sum_consistency": weyl_sum_consistency(params, geom, k),
        })
    return pd.DataFrame(rows)


def cmd_asymptotics(cfg):
    df = asymptotics_table(cfg.params, cfg.geom)
    return misc_tools.write_table(df, cfg.output_dir / "asymptotics.csv")


def _probe_setup(cfg):
    if cfg.params.n != 1 or not cfg.geom.is_box:
        raise ValueError("the cutoff probe needs a one-dimensional box config")
    return cfg.params, cfg.geom


def _check_probe_lists(params, geom, r_list, sigma_list):
    if not r_list:
        raise ValueError("r_list is empty")
    if not sigma_list:
        raise ValueError("sigma_list is empty")
    radius = float(np.exp(1.0 / params.exponent))
    for i, r in enumerate(r_list):
        if not r >= radius:
            raise ValueError(f"r_list[{i}] = {r} is below the positivity radius {radius:.6g}")
    half = min(geom.box_lengths) / 2.0
    for i, sigma in enumerate(sigma_list):
        if not 0.0 < sigma < half:
            raise ValueError(f"sigma_list[{i}] = {sigma} must lie in (0, {half:.6g})")


def cutoff_table(params, geom, quad, r_list, sigma_list, points=2 ** 16):
    """Plane-wave energies over the (r, sigma) grid plus the joint power-law fit."""
    _check_probe_lists(params, geom, r_list, sigma_list)
    rows = []
    for sigma in sigma_list:
        profile = coremath.CutoffProfile(sigma=sigma)
        for r in r_list:
            energy = solver.cutoff_planewave_energy(params, profile, geom, r, quad, points=points)
            ball = float(coremath.ball_symbol_integral(params, r))
            rows.append({
                "r": r,
                "sigma": sigma,
                "lhs": energy.lhs,
                "main_term": energy.main_term,
                "remainder": energy.remainder,
                "mass": energy.mass,
                "identity_ratio": energy.main_term / ball / energy.mass,
            })
    df = pd.DataFrame(rows)
    fit = misc_tools.fit_power_law(df, "remainder", ["r", "sigma"])
    df["r_exponent"] = fit.params.get("r", np.nan)
    df["sigma_exponent"] = fit.params.get("sigma", np.nan)
    summary = pd.DataFrame({
        "term": fit.params.index,
        "estimate": fit.params.values,
        "std_err": fit.bse.values,
    })
    return df, summary


def cmd_cutoff(cfg, r_list=None, sigma_list=None):
    params, geom = _probe_setup(cfg)
    r_list = cfg.r_list if r_list is None else tuple(r_list)
    sigma_list = cfg.sigma_list if sigma_list is None else tuple(sigma_list)
    quad = cfg.quadrature(cfg.basis())
    df, summary = cutoff_table(params, geom, quad, r_list, sigma_list, points=cfg.probe_points)
    path = misc_tools.write_table(df, cfg.output_dir / "cutoff.csv")
    fit_path = misc_tools.write_table(summary, cfg.output_dir / "cutoff_fit.csv")
    return path, fit_path


########################################################################################
## Verification suite
########################################################################################

@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _check(name, measured, tolerance, passed=None, detail=""):
    measured = float(measured)
    if passed is None:
        passed = bool(measured <= tolerance)
    return Check(name=name, passed=bool(passed), measured=measured, tolerance=float(tolerance), detail=detail)


@dataclass
class VerificationReport:
    seed: int
    config: dict
    per_k: list
    checks: list
    metadata: dict

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def to_dict(self):
        return _json_ready({
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "config": self.config,
            "per_k": [vars(report) for report in self.per_k],
            "checks": [vars(check) for check in self.checks],
            "passed": self.passed,
            "metadata": self.metadata,
        })


def _json_ready(value):
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if not np.isfinite(value) else float(value)
    return value


class _SolverRuns:
    """Spectra shared between checks, assembled through the matrix cache."""

    def __init__(self, cfg, cache_dir):
        self.cfg = cfg
        self.cache_dir = cache_dir
        self._spectra = {}

    def matrix(self, basis, quad, tag=solver.FRACTIONAL_LOG, order=None, params=None):
        params = self.cfg.params if params is None else params
        matrix, _, _ = form_cache.cached_assembly(basis, params, quad, self.cache_dir, tag, order=order)
        return matrix

    def spectrum(self, size=None, tag=solver.FRACTIONAL_LOG, order=None):
        key = (size, tag, order)
        if key not in self._spectra:
            basis = self.cfg.basis(size)
            quad = self.cfg.quadrature(basis)
            self._spectra[key] = solver.solve_spectrum(self.matrix(basis, quad, tag, order))
        return self._spectra[key]


def check_ball_integral(cfg, rng, runs):
    worst = 0.0
    for n in (1, 2, 3):
        omega = coremath.unit_ball_volume(n)
        for s in (0.1, 0.25, 0.5, 0.75, 0.9):
            params = coremath.SpectralParams(n=n, s=s)
            p = params.exponent
            for R in (0.5, 1.0, 2.0, 5.0):
                value, _ = integrate.quad(
                    lambda r: r ** (p - 1.0) * 2.0 * np.log(r), 0.0, R,
                    epsabs=0.0, epsrel=1e-11, limit=200,
                )
                reference = n * omega * value
                closed = coremath.ball_symbol_integral(params, R)
                worst = max(worst, misc_tools.relative_error(closed, reference))
    return [_check("ball_integral_quadrature", worst, 1e-8, detail="60-point (n, s, R) grid")]


def _random_params(rng):
    return coremath.SpectralParams(n=int(rng.integers(1, 3)), s=float(rng.uniform(0.1, 0.9)))


def check_bathtub(cfg, rng, runs, cases=50, n_cells=10_000):
    worst, undercut = 0.0, -np.inf
    for _ in range(cases):
        params = _random_params(rng)
        M1 = float(rng.uniform(0.5, 2.0))
        A = M1 * coremath.unit_ball_volume(params.n) * float(rng.uniform(1.0, 20.0))
        main = coremath.lemma24_bounds(params, M1, A).main
        radius = 2.0 * max(coremath.optimal_radius(params, M1, A), 1.0)
        oracle = coremath.bathtub_minimum_oracle(params, M1, A, n_cells=n_cells, radius=radius)
        _, integrals = coremath.radial_cells(params, radius, n_cells)
        cell = M1 * float(np.max(np.abs(integrals)))
        worst = max(worst, abs(oracle - main) / max(1.0, abs(main)))
        undercut = max(undercut, (main - oracle) - cell)

    lowest = -np.inf
    for _ in range(cases):
        params = _random_params(rng)
        M1 = float(rng.uniform(0.5, 2.0))
        A = M1 * coremath.unit_ball_volume(params.n) * float(rng.uniform(0.01, 0.99))
        universal = coremath.lemma24_bounds(params, M1, A).universal
        oracle = coremath.bathtub_minimum_oracle(params, M1, A, n_cells=n_cells)
        lowest = max(lowest, (universal - oracle) / max(1.0, abs(universal)))
    return [
        _check(
            "bathtub_main_bound", worst, 1e-3, passed=worst <= 1e-3 and undercut <= 0.0,
            detail=f"{cases} seeded cases with A >= M1 omega_n; worst undercut beyond one cell {undercut:.3e}",
        ),
        _check("bathtub_universal_bound", lowest, 0.0, detail=f"{cases} seeded cases with A < M1 omega_n"),
    ]


def check_psi(cfg, rng, runs, cases=50):
    excess, identity = -np.inf, 0.0
    for _ in range(cases):
        params = _random_params(rng)
        M1 = float(rng.uniform(0.5, 2.0))
        A = M1 * coremath.unit_ball_volume(params.n) * float(rng.uniform(1.0, 50.0))
        R_A = coremath.optimal_radius(params, M1, A)
        peak = float(coremath.psi_A(params, M1, A, R_A))
        ball = M1 * float(coremath.ball_symbol_integral(params, R_A))
        scale = max(abs(peak), 1e-300)
        identity = max(identity, abs(peak - ball) / scale)
        grid = np.linspace(1.0, 10.0 * R_A, 1000)
        values = coremath.psi_A(params, M1, A, grid)
        excess = max(excess, float(np.max(values - peak)) / scale)
    return [
        _check("psi_maximum", excess, 1e-10, detail="Psi_A on [1, 10 R_A] never exceeds Psi_A(R_A)"),
        _check("psi_identity", identity, 1e-12, detail="Psi_A(R_A) = M1 * ball integral at R_A"),
    ]


def check_symbol(cfg, rng, runs):
    worst_fd, monotone, negative = 0.0, True, True
    for n in (1, 2, 3):
        for s in (0.1, 0.25, 0.5, 0.75, 0.9):
            symbol = coremath.RadialSymbol(coremath.SpectralParams(n=n, s=s))
            r = np.logspace(-1.0, 2.0, 100)
            h = 1e-5 * r
            numeric = (symbol(r + h) - symbol(r - h)) / (2.0 * h)
            exact = symbol.derivative(r)
            worst_fd = max(worst_fd, float(np.max(np.abs(numeric - exact) / np.maximum(1.0, np.abs(exact)))))
            above = symbol(np.linspace(1.0, 100.0, 2000))
            monotone &= bool(np.all(np.diff(above) > 0))
            negative &= bool(np.all(symbol(np.linspace(1e-6, 1.0, 2000, endpoint=False)) < 0))
    return [
        _check("symbol_derivative", worst_fd, 1e-6, detail="central differences at 100 log-spaced radii"),
        _check("symbol_sign_and_monotonicity", 0.0 if monotone and negative else 1.0, 0.0,
               detail="increasing on [1, 100], negative on (0, 1)"),
    ]


def check_karamata(cfg, rng, runs):
    worst = max(abs(coremath.karamata_sum_ratio(2.0, 1.0, k) - 1.0) * np.log(k) for k in ASYMPTOTIC_KS)
    k = 100_000
    consistency = weyl_sum_consistency(cfg.params, cfg.geom, k)
    return [
        _check("karamata_ratio", worst, 1.2, detail="|ratio - 1| ln k over k = 1e3..1e6"),
        _check("weyl_sum_consistency", abs(consistency - 1.0), 1.2 / np.log(k),
               detail=f"sum of Weyl eigenvalues over weyl_sum at k = {k}: {consistency:.6f}"),
    ]


def check_cutoff_mass(cfg, rng, runs):
    worst = -np.inf
    for lengths in ((np.pi,), (1.0,), (2.0, 1.0)):
        geom = bounds.DomainGeometry.box(lengths)
        points = 20_000 if geom.n == 1 else 1000
        for sigma in (0.02, 0.05, 0.1):
            defect = geom.volume - coremath.cutoff_mass(coremath.CutoffProfile(sigma), geom, points)
            layer = float(geom.layer_volume(sigma))
            # > 0 means the defect leaves [0, |Omega_sigma|]
            worst = max(worst, -defect, defect - layer)
    return [_check("cutoff_mass_defect", worst, 0.0, detail="|Omega| - int w^2 within [0, |Omega_sigma|]")]


def check_bounds_invariants(cfg, rng, runs):
    params, geom = cfg.params, cfg.geom
    threshold = bounds.lower_bound_threshold(params, geom)
    onset = bounds.main_regime_onset(params, geom)
    regimes_ok = bounds.lower_bound_sum(params, geom, onset).regime == bounds.REGIME_MAIN
    if onset > 1:
        regimes_ok &= bounds.lower_bound_sum(params, geom, onset - 1).regime == bounds.REGIME_UNIVERSAL

    first_positive = int(np.floor(bounds.positivity_threshold(params, geom))) + 1
    positive = min(bounds.lower_bound_sum(params, geom, k).value for k in range(first_positive, first_positive + 200))

    start = max(onset, int(np.ceil(np.e * threshold)))
    values = [bounds.lower_bound_sum(params, geom, k).value for k in range(start, start + 200)]
    increasing = float(np.min(np.diff(values)))

    allowed = abs(np.log(1.0 / threshold)) + 1.0
    ratio_excess = 0.0
    for k in np.unique(np.geomspace(max(onset, 2), 1e6, 40).astype(int)):
        ratio = bounds.lower_bound_sum(params, geom, k).value / bounds.weyl_sum(params, geom, k)
        ratio_excess = max(ratio_excess, abs(ratio - 1.0) * np.log(k) / allowed)

    doubled = bounds.DomainGeometry(n=geom.n, volume=2.0 * geom.volume)
    prefactor_error = misc_tools.relative_error(
        bounds.main_prefactor(params, doubled), bounds.main_prefactor(params, geom) * 2.0 ** (-params.ratio)
    )
    shift_error = 0.0
    k0 = max(bounds.main_regime_onset(params, doubled), int(np.ceil(np.e ** 2 * 2.0 * threshold)))
    for k in range(k0, k0 + 50):
        expected = (
            bounds.main_prefactor(params, geom) * 2.0 ** (-params.ratio) * k ** (1.0 + params.ratio)
            * (np.log(k / threshold) - np.log(2.0) - params.n / params.exponent)
        )
        shift_error = max(shift_error, misc_tools.relative_error(bounds.lower_bound_sum(params, doubled, k).value, expected))

    ks = np.array([2, 10, 1_000, 100_000])
    factorization = float(np.max(misc_tools.relative_error(
        bounds.classical_weyl_sum(params, geom, ks) * bounds.log_weyl_sum(params.n, ks), bounds.weyl_sum(params, geom, ks)
    )))

    checks = [
        _check("bounds_threshold_regime", 0.0 if regimes_ok else 1.0, 0.0, detail=f"main regime from k = {onset}"),
        _check("bounds_positivity", positive, 0.0, passed=positive > 0, detail=f"k >= {first_positive}"),
        _check("bounds_monotonicity", increasing, 0.0, passed=increasing > 0, detail=f"k >= {start}"),
        _check("bounds_asymptotic_ratio", ratio_excess, 1.0, detail="|lower/weyl_sum - 1| ln k / (|ln k0| + 1)"),
        _check("bounds_scale_coherence", max(prefactor_error, shift_error), 1e-12, detail="doubling |Omega|"),
        _check("weyl_factorization", factorization, 1e-12, detail="weyl_sum = classical_weyl_sum * log_weyl_sum"),
    ]
    if geom.is_box:
        checks.append(_check("layer_bound_defaults", 0.0 if geom.check_layer_bound() else 1.0, 0.0,
                             detail=f"C = {geom.layer_constant:.6g}, t0 = {geom.layer_max_width:.6g}"))
    return checks


def check_plancherel(cfg, rng, runs):
    basis = cfg.basis(min(cfg.basis_size, 50))
    gram = solver.gram_matrix(basis, cfg.quadrature(basis))
    error = float(np.max(np.abs(gram - np.eye(basis.size))))
    return [_check("plancherel_identity", error, 1e-9, detail=f"Gram matrix of {basis.size} functions")]


def check_classical_limit(cfg, rng, runs, count=20):
    basis = cfg.basis()
    quad = cfg.quadrature(basis)
    if basis.box.n == 2:
        # the xi^2 symbol grows into the corner |xi_1|, |xi_2| > Xi
        quad = replace(quad, cutoff_radius=2.0 * quad.cutoff_radius)
    spectrum = solver.solve_spectrum(runs.matrix(basis, quad, solver.FRACTIONAL, order=1.0))
    lengths = np.asarray(basis.lengths)
    expected = np.sort([np.sum((np.asarray(j) * np.pi / lengths) ** 2) for j in basis.indices])[:count]
    error = float(np.max(misc_tools.relative_error(spectrum.eigenvalues[:count], expected)))
    return [_check("classical_limit", error, 1e-4, detail=f"first {count} eigenvalues of the s'=1 form")]


def check_derivative_oracle(cfg, rng, runs):
    basis = cfg.basis(20)
    quad = cfg.quadrature(basis)
    coarse = solver.derivative_oracle_check(basis, cfg.params, quad, 1e-2)
    fine = solver.derivative_oracle_check(basis, cfg.params, quad, 1e-3)
    ratio = coarse / fine if fine > 0 else np.inf
    return [
        _check("derivative_oracle", fine, 1e-4, detail="h = 1e-3, basis 20"),
        _check("derivative_oracle_decay", ratio, 200.0, passed=50.0 <= ratio <= 200.0,
               detail="error(h=1e-2) / error(h=1e-3), quadratic decay gives 100"),
    ]


def per_k_reports(cfg, runs):
    spectrum = runs.spectrum()
    sums = np.cumsum(solver.resolved(spectrum))
    return [
        bounds.bound_report(cfg.params, cfg.geom, k, computed_sum=sums[k - 1], upper_constant=cfg.upper_constant)
        for k in range(1, cfg.k_max + 1)
    ]


def check_sums(cfg, rng, runs):
    spectrum = runs.spectrum()
    sums = np.cumsum(solver.resolved(spectrum))
    lower = np.array([bounds.lower_bound_sum(cfg.params, cfg.geom, k).value for k in range(1, sums.size + 1)])
    gap = float(np.min(sums - lower))
    onset = int(np.floor(bounds.positivity_threshold(cfg.params, cfg.geom))) + 1
    positive = float(np.min(sums[onset - 1:])) if onset <= sums.size else np.inf

    small = bounds.DomainGeometry.box((1.0,) * cfg.params.n)
    small_basis = solver.GalerkinBasis.for_box(small, 40 if small.n == 1 else 6)
    first = float(solver.solve_spectrum(
        runs.matrix(small_basis, cfg.quadrature(small_basis))
    ).eigenvalues[0])
    return [
        _check("lower_bound_sandwich", gap, 0.0, passed=gap >= 0.0,
               detail=f"min over k <= {sums.size} of Ritz sum minus lower bound"),
        _check("sum_positivity", positive, 0.0, passed=positive > 0.0, detail=f"k >= {onset}"),
        _check("small_domain_positivity", first, 0.0, passed=first > 0.0,
               detail=f"lambda_1 on the unit box, |Omega| = 1 < {bounds.small_volume_threshold(cfg.params):.6g}"),
    ]


def check_ritz_monotonicity(cfg, rng, runs):
    big = cfg.basis()
    quad = cfg.quadrature(big)
    small = big.nested(cfg.basis_size // 2)
    coarse = solver.solve_spectrum(runs.matrix(small, quad)).eigenvalues
    fine = solver.solve_spectrum(runs.matrix(big, quad)).eigenvalues
    excess = float(np.max(fine[: small.size] - coarse))
    return [_check("ritz_monotonicity", excess, 1e-9, detail=f"nested bases {small.size} -> {big.size}")]


def check_upper_trend(cfg, rng, runs):
    params, geom = cfg.params, cfg.geom
    coarse = runs.spectrum()
    fine = runs.spectrum(2 * cfg.basis_size)
    sums = np.cumsum(solver.resolved(fine))
    ks = [k for k in TREND_KS if k <= sums.size]
    ratios = np.array([sums[k - 1] / bounds.weyl_sum(params, geom, k) for k in ks])
    trend_ok = bool(np.all(np.isfinite(ratios)) and np.all(ratios >= 1.0) and np.all(np.diff(ratios) <= 0.0))

    c_coarse = bounds.estimate_upper_constant(solver.resolved(coarse), params, geom)
    c_fine = bounds.estimate_upper_constant(solver.resolved(fine), params, geom)
    top = max(abs(c_coarse), abs(c_fine))
    drift = abs(c_fine - c_coarse) / top if top > 0 else 0.0
    return [
        _check("weyl_ratio_trend", float(ratios.max() - ratios.min()) if ratios.size else np.nan, 0.0,
               passed=trend_ok, detail="rho_k = " + ", ".join(f"{k}: {r:.6f}" for k, r in zip(ks, ratios))),
        _check("upper_constant_stability", drift, 0.2,
               detail=f"C({cfg.basis_size}) = {c_coarse:.6g}, C({2 * cfg.basis_size}) = {c_fine:.6g}"),
    ]


def check_probe(cfg, rng, runs):
    params = coremath.SpectralParams(n=1, s=cfg.params.s)
    geom = bounds.DomainGeometry.box(cfg.geom.box_lengths[:1])
    basis = solver.GalerkinBasis.for_box(geom, cfg.basis_size)
    df, _ = cutoff_table(params, geom, cfg.quadrature(basis), cfg.r_list, cfg.sigma_list, points=cfg.probe_points)

    r = np.asarray(cfg.r_list)
    antiderivative = coremath.symbol_antiderivative(params, r) - coremath.symbol_antiderivative(params, -r)
    identity = float(np.max(misc_tools.relative_error(antiderivative, coremath.ball_symbol_integral(params, r))))
    column = float(np.max(np.abs(df["identity_ratio"] - 1.0)))
    r_exponent = float(df["r_exponent"].iloc[0])
    sigma_exponent = float(df["sigma_exponent"].iloc[0])
    return [
        _check("planewave_identity", identity, 1e-12,
               detail="M(r) from the 1D antiderivative against the ball integral"),
        _check("planewave_identity_column", column, 1e-10,
               detail="main_term / (ball integral * int w^2) - 1"),
        _check("planewave_r_exponent", r_exponent, params.exponent + 0.3,
               detail="OLS exponent of |remainder| in r"),
        _check("planewave_sigma_exponent", sigma_exponent, 1.3, passed=0.7 <= sigma_exponent <= 1.3,
               detail="OLS exponent of |remainder| in sigma, expected in [0.7, 1.3]"),
    ]


def check_determinism(cfg, rng, runs):
    basis = cfg.basis(min(cfg.basis_size, 64))
    quad = cfg.quadrature(basis)
    serial = solver.assemble_form_matrix(basis, cfg.params, quad, threads=1).entries
    parallel = solver.assemble_form_matrix(basis, cfg.params, quad, threads=0).entries
    same = serial.tobytes() == parallel.tobytes()
    return [_check("assembly_determinism", 0.0 if same else float(np.max(np.abs(serial - parallel))), 0.0,
                   passed=same, detail="1 thread against all cores, bytewise")]


CHECKS = (
    check_ball_integral,
    check_bathtub,
    check_psi,
    check_symbol,
    check_karamata,
    check_cutoff_mass,
    check_bounds_invariants,
    check_plancherel,
    check_classical_limit,
    check_derivative_oracle,
    check_sums,
    check_ritz_monotonicity,
    check_upper_trend,
    check_probe,
    check_determinism,
)


def run_verification(cfg, cache_dir=None, checks=CHECKS):
    """Run the acceptance suite; returns a VerificationReport."""
    cache_dir = config.CACHE_DIR if cache_dir is None else Path(cache_dir)
    rng = misc_tools.seeded_rng(cfg.seed)
    runs = _SolverRuns(cfg, cache_dir)
    results, timings = [], {}
    for check in checks:
        start = time.perf_counter()
        for result in check(cfg, rng, runs):
            logger.info("%s %s (measured %.6g, tolerance %.3g)",
                        "PASS" if result.passed else "FAIL", result.name, result.measured, result.tolerance)
            results.append(result)
        timings[check.__name__] = round(time.perf_counter() - start, 3)

    per_k = per_k_reports(cfg, runs) if cfg.geom.is_box else []
    metadata = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "timings": timings,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "statsmodels": statsmodels.__version__,
        },
    }
    return VerificationReport(seed=cfg.seed, config=cfg.echo(), per_k=per_k, checks=results, metadata=metadata)


def cmd_verify(cfg, cache_dir=None):
    report = run_verification(cfg, cache_dir=cache_dir)
    path = cfg.output_dir / "verification.json"
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False)
    try:
        path.write_text(text + "\n")
    except OSError as err:
        raise OSError(f"could not write report to {path}: {err}") from err
    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        logger.warning("%d check(s) failed: %s", len(failed), ", ".join(failed))
    return report, path


########################################################################################
## CLI
########################################################################################

def build_parser():
    parser = argparse.ArgumentParser(prog="speclog", description=__doc__.strip().splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bounds", "tabulate lower/upper bounds and Weyl asymptotics"),
        ("solve", "Galerkin spectrum of the configured form"),
        ("verify", "run the acceptance suite and write verification.json"),
        ("asymptotics", "Karamata ratio and Weyl-sum consistency tables"),
        ("cutoff", "plane-wave energy of boundary-layer cutoffs"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, default=config.DEFAULT_CONFIG)
        sub.add_argument("--out", type=Path, default=None, help="output directory")
        sub.add_argument("--seed", type=int, default=None)
        if name == "cutoff":
            sub.add_argument("--r-list", type=float, nargs="+", default=None)
            sub.add_argument("--sigma-list", type=float, nargs="+", default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL, format=LOG_FORMAT)
    try:
        cfg = ExperimentConfig.from_json(args.config, output_dir=args.out, seed=args.seed)
        cfg.ensure_output_dir()
        if args.command == "bounds":
            cmd_bounds(cfg)
        elif args.command == "solve":
            cmd_solve(cfg)
        elif args.command == "asymptotics":
            cmd_asymptotics(cfg)
        elif args.command == "cutoff":
            cmd_cutoff(cfg, r_list=args.r_list, sigma_list=args.sigma_list)
        else:
            report, _ = cmd_verify(cfg)
            return EXIT_OK if report.passed else EXIT_CHECK_FAILED
    except solver.QuadratureConfigError as err:
        logger.error("quadrature config rejected (%s): %s", err.invariant, err)
        return EXIT_INFRASTRUCTURE
    except (ValueError, OSError, KeyError, RuntimeError) as err:
        logger.error("%s", err)
        return EXIT_INFRASTRUCTURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

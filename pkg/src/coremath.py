"""
This module holds the closed-form mathematics of the fractional-logarithmic symbol

    m(xi) = |xi|^{2s} ln |xi|^2 = w(|xi|),

the ball integrals of that symbol, the optimization in R behind the lower bound
on the symbol moment M2 (with a brute-force bathtub minimizer as an independent
oracle), the Karamata summation ratio, and the C^2 cutoff used to build
boundary-layer test functions on boxes.

Everything here is a pure function of its inputs and accepts numpy arrays where
that is natural (radii, points), so the other modules can evaluate on grids.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import gamma

logger = logging.getLogger(__name__)

# Relative slack used when comparing a mass A against the gate M1 * omega_n,
# so that A = M1 * omega_n lands on the main branch despite rounding in omega_n.
GATE_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralParams:
    """Space dimension n and fractional order s, 0 < s < 1."""

    n: int
    s: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension n must be a positive integer, got n={self.n}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"order s must lie in (0, 1), got s={self.s}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", float(self.s))

    @property
    def exponent(self):
        """n + 2s, the homogeneity of the ball integrals."""
        return self.n + 2.0 * self.s

    @property
    def ratio(self):
        """2s / n, the Weyl growth exponent of a single eigenvalue."""
        return 2.0 * self.s / self.n


def unit_ball_volume(n):
    """
    Volume omega_n = pi^{n/2} / Gamma(n/2 + 1) of the unit ball in R^n.

    >>> unit_ball_volume(2)
    3.141592653589793
    """
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got n={n}")
    return float(np.pi ** (n / 2.0) / gamma(n / 2.0 + 1.0))


class RadialSymbol:
    """
    Radial profile w(r) = r^{2s} ln r^2 of the symbol, with w(0) := 0.

    w vanishes at r = 1, is negative on (0, 1) with its minimum at
    r* = exp(-1/(2s)), and is strictly increasing on [r*, inf).
    """

    def __init__(self, params):
        self.params = params

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("the radial symbol is only defined for r >= 0")
        safe = np.where(r > 0, r, 1.0)
        value = np.where(r > 0, safe ** (2.0 * self.params.s) * 2.0 * np.log(safe), 0.0)
        return value[()]

    def derivative(self, r):
        """w'(r) = 2 r^{2s-1} (2s ln r + 1), for r > 0."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("w'(r) is only evaluated for r > 0")
        s = self.params.s
        return (2.0 * r ** (2.0 * s - 1.0) * (2.0 * s * np.log(r) + 1.0))[()]

    @property
    def minimizer(self):
        return float(np.exp(-1.0 / (2.0 * self.params.s)))

    @property
    def minimum(self):
        """w(r*) = -1 / (e s)."""
        return float(-1.0 / (np.e * self.params.s))


def symbol_radial(params, r):
    """Evaluate w(r) = r^{2s} ln r^2 (0 at r = 0). Rejects r < 0."""
    return RadialSymbol(params)(r)


def ball_symbol_integral(params, R):
    """
    Integral of |z|^{2s} ln |z|^2 over the ball B_R in R^n, in closed form:

        n omega_n R^{n+2s} ( ln R^2 / (n+2s) - 2 / (n+2s)^2 ).

    R = 0 returns 0, which the bathtub grid uses for its innermost cell.
    """
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise ValueError("ball radius must be nonnegative")
    p = params.exponent
    omega = unit_ball_volume(params.n)
    safe = np.where(R > 0, R, 1.0)
    value = params.n * omega * safe ** p * (2.0 * np.log(safe) / p - 2.0 / p ** 2)
    return np.where(R > 0, value, 0.0)[()]


def symbol_antiderivative(params, t):
    """
    Odd antiderivative G(t) = sign(t) int_0^{|t|} w(r) dr of the 1D symbol.

    In one dimension G(R) - G(-R) is the ball integral over (-R, R).
    """
    t = np.asarray(t, dtype=float)
    q = 2.0 * params.s + 1.0
    a = np.abs(t)
    safe = np.where(a > 0, a, 1.0)
    half = safe ** q * (2.0 * np.log(safe) / q - 2.0 / q ** 2)
    return (np.sign(t) * np.where(a > 0, half, 0.0))[()]


def optimal_radius(params, M1, A):
    """R_A = (A / (M1 omega_n))^{1/n}, clamped to 1 when A sits on the gate."""
    omega = unit_ball_volume(params.n)
    radius = (A / (M1 * omega)) ** (1.0 / params.n)
    if A >= M1 * omega * (1.0 - GATE_RTOL):
        radius = max(radius, 1.0)
    return float(radius)


def psi_A(params, M1, A, R):
    """
    Psi_A(R) = A w(R) - M1 ( w(R) |B_R| - int_{B_R} w(|z|) dz ), for R >= 1.

    Every R >= 1 gives a lower bound M2 >= Psi_A(R); the maximum sits at R_A.
    """
    if M1 <= 0:
        raise ValueError(f"M1 must be positive, got {M1}")
    if A <= 0:
        raise ValueError(f"A must be positive, got {A}")
    R = np.asarray(R, dtype=float)
    if np.any(R < 1.0):
        raise ValueError("Psi_A is only defined for R >= 1")
    w = symbol_radial(params, R)
    ball = unit_ball_volume(params.n) * R ** params.n
    return (A * w - M1 * (w * ball - ball_symbol_integral(params, R)))[()]


class Lemma24Bounds(NamedTuple):
    universal: float
    main: Optional[float]


def lemma24_bounds(params, M1, A):
    """
    Lower bounds on M2 = int |z|^{2s} ln|z|^2 f(z) dz over 0 <= f <= M1, int f = A.

    `universal` always holds. `main` is only defined when A >= M1 omega_n and is
    None otherwise.
    """
    if M1 <= 0:
        raise ValueError(f"M1 must be positive, got {M1}")
    if A < 0:
        raise ValueError(f"A must be nonnegative, got {A}")
    n, p = params.n, params.exponent
    omega = unit_ball_volume(n)
    universal = -2.0 * n * omega / p ** 2 * M1

    gate = M1 * omega
    if A < gate * (1.0 - GATE_RTOL):
        return Lemma24Bounds(universal=float(universal), main=None)
    main = (
        2.0 / p
        * gate ** (-params.ratio)
        * A ** (1.0 + params.ratio)
        * (np.log(A / gate) - n / p)
    )
    return Lemma24Bounds(universal=float(universal), main=float(main))


def lemma24_asymptotic_main(params, M1, A):
    """Leading large-A part (2/(n+2s)) (M1 omega_n)^{-2s/n} A^{1+2s/n} ln A."""
    gate = M1 * unit_ball_volume(params.n)
    return float(
        2.0 / params.exponent * gate ** (-params.ratio) * A ** (1.0 + params.ratio) * np.log(A)
    )


def radial_cells(params, radius, n_cells):
    """Volumes and exact symbol integrals of a uniform grid of radial shells."""
    edges = np.linspace(0.0, radius, n_cells + 1)
    volumes = unit_ball_volume(params.n) * np.diff(edges ** params.n)
    integrals = np.diff(ball_symbol_integral(params, edges))
    return volumes, integrals


def bathtub_minimum_oracle(params, M1, A, n_cells=10_000, radius=None):
    """
    Brute-force minimum of M2 over radial densities 0 <= f <= M1 with mass A.

    Shells of a uniform radial grid on [0, radius] are filled with density M1
    in ascending order of their mean symbol value until the mass A is used
    up, the last shell being filled fractionally. The default radius is
    2 max(R_A, 1), which contains every sublevel set the filling can reach.

    The returned value is M2 of an admissible f, so it can never undercut the
    true minimum; it overshoots it by at most one shell's worth of symbol.
    """
    if M1 <= 0:
        raise ValueError(f"M1 must be positive, got {M1}")
    if A <= 0:
        raise ValueError(f"A must be positive, got {A}")
    if n_cells < 1000:
        raise ValueError(f"the radial grid needs at least 1000 cells, got {n_cells}")
    if radius is None:
        radius = 2.0 * max(optimal_radius(params, M1, A), 1.0)

    volumes, integrals = radial_cells(params, radius, n_cells)
    capacity = M1 * volumes.sum()
    if capacity < A * (1.0 - GATE_RTOL):
        raise ValueError(
            f"grid capacity M1*|B_radius| = {capacity:.6g} is below the mass A = {A:.6g}"
        )

    levels = integrals / volumes
    order = np.argsort(levels, kind="stable")
    mass = M1 * np.cumsum(volumes[order])
    n_full = int(np.searchsorted(mass, A, side="left"))

    total = M1 * integrals[order[:n_full]].sum()
    if n_full < n_cells:
        filled = mass[n_full - 1] if n_full > 0 else 0.0
        marginal = order[n_full]
        fraction = (A - filled) / (M1 * volumes[marginal])
        total += fraction * M1 * integrals[marginal]
    return float(total)


def karamata_sum_ratio(rho, c, k):
    """
    Ratio of S_k = sum_{j=2}^k (c/Gamma(rho)) j^{rho-1} ln j to its Karamata
    asymptote (c/Gamma(1+rho)) k^rho ln k. Tends to 1 like 1 - 1/(rho ln k).
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if int(k) != k or k < 3:
        raise ValueError(f"k must be an integer >= 3, got {k}")
    j = np.arange(2, int(k) + 1, dtype=float)
    partial = c / gamma(rho) * np.sum(j ** (rho - 1.0) * np.log(j))
    asymptote = c / gamma(1.0 + rho) * float(k) ** rho * np.log(k)
    return float(partial / asymptote)


@dataclass(frozen=True)
class CutoffProfile:
    """
    Boundary-layer cutoff w_sigma(x) = ramp(dist(x, boundary) / sigma).

    The ramp is the quintic smoothstep t^3 (10 - 15 t + 6 t^2): C^2, monotone,
    0 for t <= 0 and 1 for t >= 1, with vanishing second derivative at both ends.
    """

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"layer width sigma must be positive, got {self.sigma}")

    @staticmethod
    def ramp(t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return (t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2))[()]

    @staticmethod
    def ramp_derivative(t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return (30.0 * t ** 2 * (1.0 - t) ** 2)[()]

    @staticmethod
    def ramp_second_derivative(t):
        t = np.asarray(t, dtype=float)
        inside = (t > 0) & (t < 1)
        return np.where(inside, 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t), 0.0)[()]


def _box_points(geom, x):
    if geom.box_lengths is None:
        raise ValueError("the cutoff is only evaluated on box domains")
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != geom.n:
        if geom.n != 1:
            raise ValueError(f"points must have a trailing axis of length n={geom.n}")
        x = x[..., None]
    return x, np.asarray(geom.box_lengths, dtype=float)


def boundary_distance(geom, x):
    """Distance to the boundary of the box [0, L_1] x ... x [0, L_n]; <= 0 outside."""
    x, lengths = _box_points(geom, x)
    return np.minimum(x, lengths - x).min(axis=-1)


def cutoff_value(profile, geom, x):
    """w_sigma at the point(s) x: ramp(dist/sigma) inside the box, 0 outside."""
    distance = boundary_distance(geom, x)
    value = np.where(distance > 0, profile.ramp(distance / profile.sigma), 0.0)
    return value[()]


def cutoff_mass(profile, geom, points_per_axis=2000):
    """Midpoint-rule value of the integral of w_sigma^2 over the box."""
    lengths = np.asarray(geom.box_lengths, dtype=float)
    axes = [(np.arange(points_per_axis) + 0.5) * L / points_per_axis for L in lengths]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    values = cutoff_value(profile, geom, mesh)
    cell = np.prod(lengths) / points_per_axis ** geom.n
    return float(np.sum(values ** 2) * cell)


def _demo():
    params = SpectralParams(n=1, s=0.5)
    print(lemma24_bounds(params, M1=1.0, A=2.0 * np.e))
    print(bathtub_minimum_oracle(params, M1=1.0, A=2.0 * np.e))


if __name__ == "__main__":
    _demo()

"""
Evaluators for the eigenvalue-sum bounds and Weyl-type asymptotics of the
fractional-logarithmic Laplacian on a domain of volume |Omega|.

All quantities share the prefactor

    P(n, s, |Omega|) = (2/(n+2s)) (2pi)^{2s} (omega_n |Omega|)^{-2s/n}

and the threshold k_0 = (2pi)^{-n} omega_n |Omega|, the number of lattice
states whose Fourier ball has the volume of Omega. For k >= k_0 the sum of
the first k Dirichlet eigenvalues is bounded below by

    P k^{1+2s/n} ( ln(k / k_0) - n/(n+2s) ),

and below k_0 by the universal (k-independent) constant.
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from coremath import unit_ball_volume

logger = logging.getLogger(__name__)

REGIME_MAIN = "main"
REGIME_UNIVERSAL = "universal"
THRESHOLD_RTOL = 1e-12


@dataclass(frozen=True)
class DomainGeometry:
    """
    Volume and boundary-layer data of a domain Omega in R^n.

    `layer_constant` C and `layer_max_width` t0 encode |Omega_t| <= C t for
    0 < t <= t0, where Omega_t is the set of points within t of the boundary.
    Use `DomainGeometry.box` for boxes, which fills in exact defaults.
    """

    n: int
    volume: float
    box_lengths: Optional[tuple] = None
    layer_constant: Optional[float] = None
    layer_max_width: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension n must be a positive integer, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.volume > 0:
            raise ValueError(f"volume must be positive, got {self.volume}")
        if self.box_lengths is not None:
            lengths = tuple(float(L) for L in self.box_lengths)
            if len(lengths) != self.n:
                raise ValueError(f"expected {self.n} box lengths, got {len(lengths)}")
            if any(not L > 0 for L in lengths):
                raise ValueError(f"box lengths must be positive, got {lengths}")
            product = float(np.prod(lengths))
            if abs(product - self.volume) > 1e-12 * self.volume:
                raise ValueError(
                    f"volume {self.volume} does not match the box lengths (product {product})"
                )
            object.__setattr__(self, "box_lengths", lengths)
        for name in ("layer_constant", "layer_max_width"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @classmethod
    def box(cls, lengths):
        """Box (0, L_1) x ... x (0, L_n) with C = 2 sum_i |Omega|/L_i and t0 = min L / 2."""
        lengths = tuple(float(L) for L in lengths)
        volume = float(np.prod(lengths))
        return cls(
            n=len(lengths),
            volume=volume,
            box_lengths=lengths,
            layer_constant=2.0 * sum(volume / L for L in lengths),
            layer_max_width=min(lengths) / 2.0,
        )

    @property
    def is_box(self):
        return self.box_lengths is not None

    def layer_volume(self, t):
        """Exact |Omega_t| for a box: the volume minus the inner parallel box."""
        if not self.is_box:
            raise ValueError("layer volume is only known in closed form for boxes")
        lengths = np.asarray(self.box_lengths)
        t = np.asarray(t, dtype=float)
        inner = np.prod(np.clip(lengths - 2.0 * t[..., None], 0.0, None), axis=-1)
        return (self.volume - inner)[()]

    def check_layer_bound(self, t_grid=None):
        """True when |Omega_t| <= C t on the grid (default: 200 points in (0, t0])."""
        if self.layer_constant is None or self.layer_max_width is None:
            raise ValueError("geometry has no boundary-layer constants")
        if t_grid is None:
            t_grid = np.linspace(0.0, self.layer_max_width, 201)[1:]
        t_grid = np.asarray(t_grid, dtype=float)
        slack = self.layer_constant * t_grid * (1.0 + 1e-12) - self.layer_volume(t_grid)
        return bool(np.all(slack >= 0))


def _check_dims(params, geom):
    if params.n != geom.n:
        raise ValueError(f"params are for n={params.n} but the domain has n={geom.n}")


def _as_rank(k, minimum):
    k_arr = np.asarray(k)
    if not np.all(np.equal(np.mod(k_arr, 1), 0)) or np.any(k_arr < minimum):
        raise ValueError(f"k must be an integer >= {minimum}, got {k}")
    return k_arr.astype(float)


def main_prefactor(params, geom):
    """(2/(n+2s)) (2pi)^{2s} (omega_n |Omega|)^{-2s/n}."""
    _check_dims(params, geom)
    omega = unit_ball_volume(params.n)
    return float(
        2.0 / params.exponent
        * (2.0 * np.pi) ** (2.0 * params.s)
        * (omega * geom.volume) ** (-params.ratio)
    )


def lower_bound_threshold(params, geom):
    """k_0 = (2pi)^{-n} omega_n |Omega|."""
    _check_dims(params, geom)
    return float(unit_ball_volume(params.n) * geom.volume / (2.0 * np.pi) ** params.n)


def main_regime_onset(params, geom):
    """Smallest integer k at which the main lower bound applies."""
    threshold = lower_bound_threshold(params, geom)
    return max(1, int(np.ceil(threshold * (1.0 - THRESHOLD_RTOL))))


def universal_lower_bound(params, geom):
    """-(2pi)^{-n} 2 n omega_n / (n+2s)^2 |Omega|, valid for every k >= 1."""
    _check_dims(params, geom)
    omega = unit_ball_volume(params.n)
    return float(
        -(2.0 * np.pi) ** (-params.n) * 2.0 * params.n * omega / params.exponent ** 2 * geom.volume
    )


class LowerBound(NamedTuple):
    value: float
    regime: str


def lower_bound_sum(params, geom, k):
    """Lower bound on sum_{j<=k} lambda_j, with the regime it came from."""
    _as_rank(k, 1)
    if k < main_regime_onset(params, geom):
        return LowerBound(universal_lower_bound(params, geom), REGIME_UNIVERSAL)
    threshold = lower_bound_threshold(params, geom)
    value = (
        main_prefactor(params, geom)
        * float(k) ** (1.0 + params.ratio)
        * (np.log(k / threshold) - params.n / params.exponent)
    )
    return LowerBound(float(value), REGIME_MAIN)


class Remark26Split(NamedTuple):
    leading: float
    correction: float


def remark26_split(params, geom, k):
    """
    Split the main lower bound into the leading P k^{1+2s/n} ln k and the
    k^{1+2s/n}-order correction; the two add up to the main value.
    """
    k = float(_as_rank(k, 2))
    prefactor = main_prefactor(params, geom)
    growth = k ** (1.0 + params.ratio)
    leading = prefactor * growth * np.log(k)
    shift = -np.log(lower_bound_threshold(params, geom)) - params.n / params.exponent
    return Remark26Split(float(leading), float(prefactor * shift * growth))


def positivity_threshold(params, geom):
    """Eigenvalue sums are positive for every integer k above this value."""
    return float(lower_bound_threshold(params, geom) * np.exp(params.n / params.exponent))


def small_volume_threshold(params):
    """Domains with |Omega| below this value have lambda_1 > 0."""
    omega = unit_ball_volume(params.n)
    return float((2.0 * np.pi) ** params.n / omega * np.exp(-params.n / params.exponent))


def _leading(params, geom, k):
    k = np.asarray(k, dtype=float)
    return main_prefactor(params, geom) * k ** (1.0 + params.ratio) * np.log(k)


def weyl_eigenvalue(params, geom, k):
    """Weyl asymptote (2/n)(2pi)^{2s}(omega_n |Omega|)^{-2s/n} k^{2s/n} ln k of lambda_k."""
    k = _as_rank(k, 2)
    _check_dims(params, geom)
    omega = unit_ball_volume(params.n)
    scale = (2.0 * np.pi) ** (2.0 * params.s) * (omega * geom.volume) ** (-params.ratio)
    return (scale * k ** params.ratio * (2.0 / params.n) * np.log(k))[()]


def weyl_sum(params, geom, k):
    """Asymptote P k^{1+2s/n} ln k of sum_{j<=k} lambda_j."""
    k = _as_rank(k, 2)
    return _leading(params, geom, k)[()]


def classical_weyl_sum(params, geom, k):
    """Berezin-Li-Yau value (n/(n+2s)) C_{n,s} |Omega|^{-2s/n} k^{1+2s/n} for (-Delta)^s."""
    k = _as_rank(k, 1)
    _check_dims(params, geom)
    omega = unit_ball_volume(params.n)
    constant = (2.0 * np.pi) ** (2.0 * params.s) * omega ** (-params.ratio)
    return (
        params.n / params.exponent * constant * geom.volume ** (-params.ratio)
        * k ** (1.0 + params.ratio)
    )[()]


def log_weyl_sum(n, k):
    """(2/n) ln k, the logarithmic factor; weyl_sum = classical_weyl_sum * log_weyl_sum."""
    k = _as_rank(k, 1)
    return (2.0 / n * np.log(k))[()]


def upper_bound_sum(params, geom, k, C):
    """P k^{1+2s/n} ln k + C k^{1+2s/n}, for k above the positivity threshold."""
    if geom.layer_constant is None or geom.layer_max_width is None:
        raise ValueError("the upper bound needs a geometry with boundary-layer constants")
    if C < 0:
        raise ValueError(f"C must be nonnegative, got {C}")
    k = float(_as_rank(k, 1))
    threshold = positivity_threshold(params, geom)
    if not k > threshold:
        raise ValueError(f"k={k:g} is not above the positivity threshold {threshold:.6g}")
    return float(_leading(params, geom, k) + C * k ** (1.0 + params.ratio))


def estimate_upper_constant(spectrum, params, geom, k_max=None):
    """
    Smallest C >= 0 with sum_{j<=k} lambda_j <= P k^{1+2s/n} ln k + C k^{1+2s/n}
    over the admissible k <= k_max (default: the whole spectrum).
    """
    values = np.asarray(spectrum, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("spectrum is empty")
    if values.size < 10:
        raise ValueError(f"spectrum needs at least 10 eigenvalues, got {values.size}")
    if np.any(np.diff(values) < 0):
        raise ValueError("spectrum must be sorted in ascending order")
    k_max = values.size if k_max is None else min(int(k_max), values.size)

    ks = np.arange(1, k_max + 1)
    ks = ks[ks > positivity_threshold(params, geom)]
    if ks.size == 0:
        raise ValueError("no rank k in the spectrum lies above the positivity threshold")
    sums = np.cumsum(values)[ks - 1]
    residual = (sums - _leading(params, geom, ks)) / ks.astype(float) ** (1.0 + params.ratio)
    return float(max(residual.max(), 0.0))


@dataclass
class BoundReport:
    k: int
    lower_bound: float
    regime: str
    upper_leading: float
    weyl_k: float
    weyl_sum: float
    computed_sum: Optional[float] = None
    positivity_threshold: float = field(default=np.nan)
    upper_bound: float = field(default=np.nan)

    def dominates_lower_bound(self):
        """Ritz sums must sit above the main bound; None when there is nothing to compare."""
        if self.computed_sum is None or self.regime != REGIME_MAIN:
            return None
        return bool(self.computed_sum >= self.lower_bound)


def bound_report(params, geom, k, computed_sum=None, upper_constant=0.0):
    """
    All bounds at rank k. Weyl columns are NaN for k = 1 and the upper side
    is NaN at or below the positivity threshold, where it is not claimed.
    upper_leading is the P k^{1+2s/n} ln k term alone; upper_bound adds
    upper_constant * k^{1+2s/n}.
    """
    lower = lower_bound_sum(params, geom, k)
    threshold = positivity_threshold(params, geom)
    if k >= 2:
        weyl_k, weyl_total = weyl_eigenvalue(params, geom, k), weyl_sum(params, geom, k)
    else:
        weyl_k = weyl_total = np.nan
    if k > threshold and geom.layer_constant is not None:
        leading = float(_leading(params, geom, k))
        upper = upper_bound_sum(params, geom, k, upper_constant)
    else:
        leading = upper = np.nan
    return BoundReport(
        k=int(k),
        lower_bound=lower.value,
        regime=lower.regime,
        upper_leading=leading,
        weyl_k=float(weyl_k),
        weyl_sum=float(weyl_total),
        computed_sum=None if computed_sum is None else float(computed_sum),
        positivity_threshold=threshold,
        upper_bound=float(upper),
    )


BOUND_COLUMNS = [
    "k", "lower_bound", "regime", "weyl_k", "weyl_sum", "upper_leading", "positivity_threshold",
]


def bound_table(params, geom, k_max, spectrum=None, upper_constant=0.0):
    """
    BoundReports for k = 1..k_max as a DataFrame; adds computed_sum given a
    spectrum and upper_bound given a nonzero upper_constant.
    """
    sums = None if spectrum is None else np.cumsum(np.asarray(spectrum, dtype=float))
    if sums is not None and sums.size < k_max:
        raise ValueError(f"spectrum has {sums.size} values, fewer than k_max={k_max}")
    rows = [
        bound_report(
            params, geom, k,
            computed_sum=None if sums is None else sums[k - 1],
            upper_constant=upper_constant,
        )
        for k in range(1, k_max + 1)
    ]
    df = pd.DataFrame([vars(row) for row in rows])
    columns = BOUND_COLUMNS + ([] if upper_constant == 0 else ["upper_bound"])
    columns += [] if sums is None else ["computed_sum"]
    return df[columns]

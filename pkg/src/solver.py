"""
Galerkin eigenvalues of the fractional-logarithmic Laplacian on boxes.

The trial space is the zero-extended sine basis

    e_j(x) = prod_i sqrt(2/L_i) sin(j_i pi x_i / L_i),

which is orthonormal in L^2 and has closed-form Fourier transforms (with the
convention u^(xi) = (2pi)^{-n/2} int u e^{-i x xi} dx). The quadratic form

    A_jk = int m(|xi|) e^_j(xi) conj(e^_k(xi)) dxi

is computed by panel Gauss-Legendre quadrature on [0, Xi] per axis (the
integrand is even after dropping the odd imaginary part) plus an analytic
tail for |xi| > Xi. Besides the operator's own symbol |xi|^{2s} ln |xi|^2,
the pure powers |xi|^{2s'} are available; they give the classical limit
(s' = 1), the Gram matrix (s' = 0), and a finite-difference oracle in s.

The module also hosts the plane-wave probe for boundary-layer cutoffs, which
measures how far int_{|z|<r} <w, (-Delta)^{s+ln} e^{iz.} w> dz departs from
M(r) int w^2.
"""
import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss

import config
import coremath
from bounds import DomainGeometry

logger = logging.getLogger(__name__)

FRACTIONAL_LOG = "fractional-log"
FRACTIONAL = "fractional"
SYMBOL_TAGS = {FRACTIONAL_LOG: 0, FRACTIONAL: 1}

BLOCK_ROWS = 32
GRADING_RATIO = 0.15
IMAG_RESIDUAL_RTOL = 1e-10


class QuadratureConfigError(ValueError):
    """A quadrature configuration violates one of its invariants for a basis."""

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class ProvenanceError(ValueError):
    """A form matrix was built from a different symbol, basis or quadrature than required."""


def thread_count(threads=None):
    threads = config.SPECLOG_THREADS if threads is None else int(threads)
    return threads if threads > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class FormSymbol:
    """
    Radial symbol g(r) of a quadratic form: r^{2s} ln r^2 (tag fractional-log,
    order s) or r^{2s'} (tag fractional, order s').
    """

    tag: str
    order: float

    def __post_init__(self):
        if self.tag not in SYMBOL_TAGS:
            raise ValueError(f"unknown symbol tag {self.tag!r}")
        if self.tag == FRACTIONAL_LOG and not 0.0 < self.order < 1.0:
            raise ValueError(f"fractional-log order must lie in (0, 1), got {self.order}")
        if self.tag == FRACTIONAL and not 0.0 <= self.order <= 1.0:
            raise ValueError(f"fractional order must lie in [0, 1], got {self.order}")

    @classmethod
    def fractional_log(cls, params):
        return cls(FRACTIONAL_LOG, params.s)

    @classmethod
    def fractional(cls, order):
        return cls(FRACTIONAL, float(order))

    def _radial(self, n=1):
        return coremath.RadialSymbol(coremath.SpectralParams(n=n, s=self.order))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.tag == FRACTIONAL_LOG:
            return self._radial()(r)
        return (r ** (2.0 * self.order))[()]

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.tag == FRACTIONAL_LOG:
            return self._radial().derivative(r)
        return (2.0 * self.order * r ** (2.0 * self.order - 1.0))[()]

    def second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        two_s = 2.0 * self.order
        if self.tag == FRACTIONAL_LOG:
            return (2.0 * r ** (two_s - 2.0) * ((two_s - 1.0) * (two_s * np.log(r) + 1.0) + two_s))[()]
        return (two_s * (two_s - 1.0) * r ** (two_s - 2.0))[()]

    def power_tail(self, p, cutoff):
        """int_cutoff^inf xi^p g(xi) dxi, for p + 2*order + 1 < 0."""
        q = p + 2.0 * self.order + 1.0
        if q >= 0:
            raise ValueError(f"the tail integral diverges for p={p}")
        if self.tag == FRACTIONAL_LOG:
            return 2.0 * cutoff ** q * (-np.log(cutoff) / q + 1.0 / q ** 2)
        return -(cutoff ** q) / q

    def describe(self):
        return {"tag": self.tag, "order": self.order}


@dataclass(frozen=True)
class GalerkinBasis:
    """Sine basis on a box, indices j in {1..max_index}^n in lexicographic order."""

    box: DomainGeometry
    max_index: int
    indices: tuple

    @classmethod
    def for_box(cls, box, max_index, size=None):
        if not box.is_box:
            raise ValueError("the sine basis needs a box geometry")
        if box.n > 2:
            raise ValueError(f"only n <= 2 is supported, got n={box.n}")
        if int(max_index) != max_index or max_index < 1:
            raise ValueError(f"max_index must be a positive integer, got {max_index}")
        indices = tuple(itertools.product(range(1, int(max_index) + 1), repeat=box.n))
        if size is not None:
            if not 1 <= size <= len(indices):
                raise ValueError(f"basis size must lie in [1, {len(indices)}], got {size}")
            indices = indices[:size]
        return cls(box=box, max_index=int(max_index), indices=indices)

    @property
    def size(self):
        return len(self.indices)

    @property
    def lengths(self):
        return self.box.box_lengths

    def nested(self, size):
        """The first `size` functions, a subspace of this one."""
        if not 1 <= size <= self.size:
            raise ValueError(f"nested size must lie in [1, {self.size}], got {size}")
        return GalerkinBasis(box=self.box, max_index=self.max_index, indices=self.indices[:size])

    @property
    def max_resonance(self):
        """Largest frequency j_i pi / L_i carried by the basis."""
        top = np.max(np.asarray(self.indices), axis=0)
        return float(np.max(top * np.pi / np.asarray(self.lengths)))

    def describe(self):
        return {
            "box_lengths": list(self.lengths),
            "max_index": self.max_index,
            "size": self.size,
        }


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Per-axis panel rule on [0, cutoff_radius] plus analytic tails.

    Panels have width pi / (L panels_per_half_period), so their edges land on
    the resonances j pi / L; the panel at the origin is graded geometrically.
    """

    cutoff_radius: float
    nodes_per_panel: int = 12
    panels_per_half_period: int = 1
    grading_levels: int = 24
    tail_order: int = 8
    singularity_guard: float = 1e-6
    tail_tolerance: float = 1e-8

    def __post_init__(self):
        if not self.cutoff_radius > 0:
            raise ValueError(f"cutoff_radius must be positive, got {self.cutoff_radius}")
        for name in ("nodes_per_panel", "panels_per_half_period"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.grading_levels < 0 or self.tail_order < 0:
            raise ValueError("grading_levels and tail_order must be nonnegative")
        if not self.singularity_guard > 0:
            raise ValueError(f"singularity_guard must be positive, got {self.singularity_guard}")

    @classmethod
    def for_basis(cls, basis, factor=None, **kwargs):
        """
        Cutoff at `factor` times the top resonance (4 in 1D, 12 in 2D by default).

        The 2D corner |xi_1|, |xi_2| > Xi is only estimated and decays like
        Xi^{-4}, so rectangles need the larger cutoff to meet the tail tolerance.
        """
        if factor is None:
            factor = 4.0 if basis.box.n == 1 else 12.0
        return cls(cutoff_radius=factor * basis.max_resonance, **kwargs)

    def check(self, basis):
        if not self.cutoff_radius > basis.max_resonance:
            raise QuadratureConfigError(
                "cutoff_above_resonance",
                f"cutoff radius {self.cutoff_radius:.6g} must exceed the largest "
                f"basis resonance {basis.max_resonance:.6g}",
            )

    def describe(self):
        return {
            "cutoff_radius": self.cutoff_radius,
            "nodes_per_panel": self.nodes_per_panel,
            "panels_per_half_period": self.panels_per_half_period,
            "grading_levels": self.grading_levels,
            "tail_order": self.tail_order,
            "singularity_guard": self.singularity_guard,
            "tail_tolerance": self.tail_tolerance,
        }


@dataclass
class FormMatrix:
    entries: np.ndarray
    params: coremath.SpectralParams
    symbol: FormSymbol
    basis: GalerkinBasis
    quad: QuadratureConfig
    error_estimate: Optional[np.ndarray] = None

    @property
    def size(self):
        return self.entries.shape[0]

    def provenance(self):
        return {
            "basis": self.basis.describe(),
            "quadrature": self.quad.describe(),
            "symbol": self.symbol.describe(),
            "n": self.params.n,
            "s": self.params.s,
        }


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    basis_size: int
    params: Optional[coremath.SpectralParams] = None
    geom: Optional[DomainGeometry] = None

    def __len__(self):
        return len(self.eigenvalues)


def axis_rule(length, cutoff, quad):
    """
    Nodes and weights on [0, Xi] for one axis of length L, Xi being `cutoff`
    rounded up to a multiple of 2 pi / L. Returns (nodes, weights, Xi).
    """
    width = np.pi / (length * quad.panels_per_half_period)
    periods = int(np.ceil(cutoff * length / (2.0 * np.pi)))
    n_panels = 2 * quad.panels_per_half_period * max(periods, 1)
    grading = width * GRADING_RATIO ** np.arange(quad.grading_levels, 0, -1)
    edges = np.concatenate(([0.0], grading, width * np.arange(1, n_panels + 1)))

    x, w = leggauss(quad.nodes_per_panel)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (lo + hi) + 0.5 * (hi - lo) * x).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return nodes, weights, float(edges[-1])


def _transform_rows(length, js, xi, guard):
    js = np.asarray(js, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if js.size > BLOCK_ROWS:
        chunks = [_transform_rows(length, js[lo:hi], xi, guard) for lo, hi in _row_blocks(js.size)]
        return np.vstack(chunks)
    a = (js * np.pi / length)[:, None]
    sign = np.where(np.mod(js, 2) == 0, 1.0, -1.0)[:, None]
    norm = np.sqrt(2.0 / length) / np.sqrt(2.0 * np.pi)

    denom = a * a - xi * xi
    near = np.abs(denom) < guard * a * a
    closed = a * (1.0 - sign * np.exp(-1j * length * xi)) / np.where(near, 1.0, denom)
    out = np.where(near, 0.0j, closed)
    if np.any(near):
        rows, cols = np.nonzero(near)
        out[rows, cols] = _resonant_form(length, a[rows, 0], xi[cols])
    return norm * out


def _resonant_form(length, a, xi):
    # int_0^L sin(a x) e^{-i xi x} dx via sinc kernels, smooth through xi = +-a
    def h(nu):
        return length * np.exp(-0.5j * nu * length) * np.sinc(nu * length / (2.0 * np.pi))

    return (h(xi - a) - h(xi + a)) / 2j


def basis_transform_1d(L, j, xi, guard=1e-6):
    """
    Fourier transform of the zero-extended sqrt(2/L) sin(j pi x / L):

        (2pi)^{-1/2} sqrt(2/L) a (1 - (-1)^j e^{-i L xi}) / (a^2 - xi^2),  a = j pi / L.

    Within |xi^2 - a^2| < guard a^2 the equivalent sinc form is used, which
    has no removable singularity at xi = +-a.
    """
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    if int(j) != j or j < 1:
        raise ValueError(f"j must be a positive integer, got {j}")
    xi = np.asarray(xi, dtype=float)
    value = _transform_rows(L, [j], np.atleast_1d(xi), guard)[0]
    return value.reshape(xi.shape)[()]


def _tail_coefficients(a2, b2, order):
    # 1 / ((xi^2 - a^2)(xi^2 - b^2)) = sum_m c_m xi^{-4-2m},  c_m = b^2 c_{m-1} + a^{2m}
    coeffs = []
    current = np.ones_like(a2 * b2)
    a_power = np.ones_like(a2)
    for m in range(order + 1):
        if m > 0:
            a_power = a_power * a2
            current = b2 * current + a_power
        coeffs.append(current)
    return coeffs


def _tail_scale(length, js):
    # |e^_j conj(e^_k)| = a_j a_k / (pi L) |...| / |(a_j^2 - xi^2)(a_k^2 - xi^2)|
    a = np.asarray(js, dtype=float) * np.pi / length
    return (a[:, None] * a[None, :]) / (np.pi * length)


@dataclass(frozen=True)
class _HalfSlopeSymbol:
    """g'(r) / (2r): the coefficient of xi_2^2 in g(|xi|) for |xi_1| >> |xi_2|."""

    base: FormSymbol

    def __call__(self, r):
        return self.base.derivative(r) / (2.0 * np.asarray(r, dtype=float))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        return (self.base.second_derivative(r) * r - self.base.derivative(r)) / (2.0 * r * r)

    def power_tail(self, p, cutoff):
        if self.base.tag == FRACTIONAL_LOG:
            s = self.base.order
            return s * self.base.power_tail(p - 2.0, cutoff) + FormSymbol.fractional(s).power_tail(p - 2.0, cutoff)
        return self.base.order * self.base.power_tail(p - 2.0, cutoff)


def _axis_tail(length, js, symbol, cutoff, order):
    """
    Full-line tail int_{|xi| > Xi} g(|xi|) Re(e^_j conj(e^_k)) for one axis,
    with its error estimate. Xi is a multiple of 2 pi / L.
    """
    js = np.asarray(js, dtype=float)
    a = js * np.pi / length
    parity = np.where(np.mod(js, 2) == 0, 1.0, -1.0)
    coef = _tail_scale(length, js)
    even = 1.0 + parity[:, None] * parity[None, :]
    odd = parity[:, None] + parity[None, :]
    a2, b2 = (a * a)[:, None], (a * a)[None, :]

    coeffs = _tail_coefficients(a2, b2, order)
    smooth = sum(c * symbol.power_tail(-4.0 - 2.0 * m, cutoff) for m, c in enumerate(coeffs[:order]))
    smooth_error = np.abs(coeffs[order] * symbol.power_tail(-4.0 - 2.0 * order, cutoff))

    def f_prime(x):
        d = 1.0 / ((a2 - x * x) * (b2 - x * x))
        d_prime = d * (2.0 * x / (a2 - x * x) + 2.0 * x / (b2 - x * x))
        return symbol.derivative(x) * d + symbol(x) * d_prime

    d_cut = 1.0 / ((a2 - cutoff ** 2) * (b2 - cutoff ** 2))
    f_cut = symbol(cutoff) * d_cut
    oscillating = -np.sin(length * cutoff) * f_cut / length - np.cos(length * cutoff) * f_prime(cutoff) / length ** 2
    # sin(L Xi) = 0, so the f'' term drops out and f'''(Xi) / L^4 is the first omitted one
    step = 1e-2 * cutoff
    f_third = (f_prime(cutoff + step) - 2.0 * f_prime(cutoff) + f_prime(cutoff - step)) / step ** 2
    oscillating_error = np.abs(f_third) / length ** 4

    tail = 2.0 * coef * (even * smooth - odd * oscillating)
    error = 2.0 * np.abs(coef) * (np.abs(even) * smooth_error + np.abs(odd) * oscillating_error)
    return tail, error


def _row_blocks(size):
    return [(lo, min(lo + BLOCK_ROWS, size)) for lo in range(0, size, BLOCK_ROWS)]


def _mirror(upper):
    upper = np.triu(upper)
    return upper + np.triu(upper, 1).T


def _weighted_gram(real, imag, weighted, threads):
    """Upper triangle of Re(E diag(weighted) E^H), one fixed row block per task."""
    size = real.shape[0]
    out = np.zeros((size, size))

    def work(block):
        lo, hi = block
        out[lo:hi, lo:] = (real[lo:hi] * weighted) @ real[lo:].T + (imag[lo:hi] * weighted) @ imag[lo:].T

    with ThreadPoolExecutor(max_workers=thread_count(threads)) as pool:
        list(pool.map(work, _row_blocks(size)))
    return _mirror(out)


def _assemble_1d(basis, symbol, quad, threads):
    length = basis.lengths[0]
    js = np.array([idx[0] for idx in basis.indices])
    nodes, weights, cutoff = axis_rule(length, quad.cutoff_radius, quad)
    weighted = weights * symbol(nodes)

    plus = _transform_rows(length, js, nodes, quad.singularity_guard)
    bulk = _weighted_gram(plus.real, plus.imag, weighted, threads)

    # Im parts of P(xi) and P(-xi) must cancel pairwise for the fold to [0, Xi] to be exact
    minus = _transform_rows(length, js, -nodes, quad.singularity_guard)
    cross = (plus.imag * weighted) @ plus.real.T + (minus.imag * weighted) @ minus.real.T
    residual = float(np.max(np.abs(cross - cross.T)))

    tail, error = _axis_tail(length, js, symbol, cutoff, quad.tail_order)
    entries = 2.0 * bulk + tail
    logger.debug("1D assembly: %d functions, %d nodes, cutoff %.6g", basis.size, nodes.size, cutoff)
    return _mirror(entries), error, residual


def _assemble_2d(basis, symbol, quad):
    m = basis.max_index
    js = np.arange(1, m + 1)
    rules = [axis_rule(L, quad.cutoff_radius, quad) for L in basis.lengths]

    slope = _HalfSlopeSymbol(symbol)
    eye = np.eye(m)
    pairs, strips, residual = [], [], 0.0
    for length, (nodes, weights, cutoff) in zip(basis.lengths, rules):
        plus = _transform_rows(length, js, nodes, quad.singularity_guard)
        minus = _transform_rows(length, js, -nodes, quad.singularity_guard)
        scale = max(float(np.max(np.abs(plus))), 1.0)
        residual = max(residual, float(np.max(np.abs(minus - np.conj(plus)))) / scale)
        product = np.einsum("jp,kp->jkp", plus.real, plus.real) + np.einsum("jp,kp->jkp", plus.imag, plus.imag)
        pairs.append((product.reshape(m * m, -1), weights))

        # int xi^2 Re(e^_j conj(e^_k)) over the other axis is exactly a_j^2 delta_jk
        stiffness = np.diag((js * np.pi / length) ** 2)
        tail, error = _axis_tail(length, js, symbol, cutoff, quad.tail_order)
        slope_tail, slope_error = _axis_tail(length, js, slope, cutoff, quad.tail_order)
        strips.append((tail, error, slope_tail, slope_error, stiffness))

    (q1, w1), (q2, w2) = pairs
    (x1, _, cut1), (x2, _, cut2) = rules
    grid = 4.0 * w1[:, None] * w2[None, :] * symbol(np.hypot(x1[:, None], x2[None, :]))
    full = (q1 @ grid) @ q2.T
    full = full.reshape(m, m, m, m).transpose(0, 2, 1, 3).reshape(m * m, m * m)

    (t1, e1, h1, f1, k1), (t2, e2, h2, f2, k2) = strips
    full = full + np.kron(t1, eye) + np.kron(eye, t2) + np.kron(h1, k2) + np.kron(k1, h2)
    # the corner |xi_1|, |xi_2| > Xi is counted by both strips
    c1 = np.abs(_tail_scale(basis.lengths[0], js))
    c2 = np.abs(_tail_scale(basis.lengths[1], js))
    corner = 16.0 * np.kron(c1, c2) * abs(symbol(np.hypot(cut1, cut2))) / (9.0 * cut1 ** 3 * cut2 ** 3)
    error = np.kron(e1, eye) + np.kron(eye, e2) + np.kron(f1, k2) + np.kron(k1, f2) + corner

    positions = [(j1 - 1) * m + (j2 - 1) for j1, j2 in basis.indices]
    select = np.ix_(positions, positions)
    logger.debug("2D assembly: %d functions, %d x %d nodes", basis.size, x1.size, x2.size)
    return _mirror(full[select]), error[select], residual


def assemble_form_matrix(basis, params, quad, symbol_tag=FRACTIONAL_LOG, order=None, threads=None):
    """
    Assemble A_jk = int g(|xi|) e^_j(xi) conj(e^_k(xi)) dxi over R^n.

    Parameters
    ----------
    basis : GalerkinBasis
    params : coremath.SpectralParams
        Dimension and fractional order; `s` is the order of the
        fractional-log symbol.
    quad : QuadratureConfig
    symbol_tag : str
        ``"fractional-log"`` or ``"fractional"``.
    order : float, optional
        The power s' of the fractional symbol |xi|^{2s'}.
    threads : int, optional
        Worker threads; defaults to ``config.SPECLOG_THREADS`` (0 = all cores).

    Returns
    -------
    FormMatrix
        Exactly symmetric entries and the per-entry tail error estimate.
    """
    if params.n != basis.box.n:
        raise ValueError(f"params are for n={params.n} but the basis lives in n={basis.box.n}")
    if symbol_tag == FRACTIONAL_LOG:
        symbol = FormSymbol.fractional_log(params)
    elif symbol_tag == FRACTIONAL:
        if order is None:
            raise ValueError("the fractional symbol needs an order s'")
        symbol = FormSymbol.fractional(order)
    else:
        raise ValueError(f"unknown symbol tag {symbol_tag!r}")
    quad.check(basis)

    if basis.box.n == 1:
        entries, error, residual = _assemble_1d(basis, symbol, quad, threads)
    else:
        entries, error, residual = _assemble_2d(basis, symbol, quad)

    magnitude = max(float(np.max(np.abs(entries))), 1.0)
    if residual > IMAG_RESIDUAL_RTOL * magnitude:
        raise RuntimeError(f"imaginary residual {residual:.3e} does not cancel (scale {magnitude:.3e})")
    if not np.all(np.isfinite(entries)):
        raise RuntimeError("assembled form matrix has non-finite entries")

    scale = max(float(np.max(np.abs(np.diag(entries)))), 1.0)
    worst = float(np.max(np.diag(error))) / scale
    if worst > quad.tail_tolerance:
        raise QuadratureConfigError(
            "tail_tolerance",
            f"estimated tail error {worst:.3e} relative to the largest diagonal entry exceeds {quad.tail_tolerance:.1e}; "
            "raise cutoff_radius or tail_order",
        )
    logger.info(
        "assembled %s form matrix: size %d, worst tail estimate %.2e",
        symbol.tag, basis.size, worst,
    )
    return FormMatrix(
        entries=entries, params=params, symbol=symbol, basis=basis, quad=quad, error_estimate=error,
    )


def gram_matrix(basis, quad, threads=None):
    """The order-0 form, i.e. the L^2 Gram matrix of the basis through Plancherel."""
    params = coremath.SpectralParams(n=basis.box.n, s=0.5)
    return assemble_form_matrix(basis, params, quad, FRACTIONAL, order=0.0, threads=threads).entries


def solve_spectrum(matrix):
    """All eigenvalues of a FormMatrix (or symmetric array), ascending."""
    if isinstance(matrix, FormMatrix):
        entries, params, geom = matrix.entries, matrix.params, matrix.basis.box
    else:
        entries, params, geom = np.asarray(matrix, dtype=float), None, None
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise ValueError("matrix has non-finite entries")
    eigenvalues = scipy.linalg.eigh(entries, eigvals_only=True)
    return Spectrum(eigenvalues=eigenvalues, basis_size=entries.shape[0], params=params, geom=geom)


def resolved(spectrum):
    """The lowest basis_size/2 Ritz values, the part reported as trustworthy."""
    return spectrum.eigenvalues[: spectrum.basis_size // 2]


def central_difference(upper, lower, h):
    """(A^{s+h} - A^{s-h}) / (2h) for two fractional matrices built on the same basis and rule."""
    for matrix in (upper, lower):
        if matrix.symbol.tag != FRACTIONAL:
            raise ProvenanceError(f"expected a fractional matrix, got {matrix.symbol.tag!r}")
    if upper.basis != lower.basis or upper.quad != lower.quad:
        raise ProvenanceError("matrices were assembled on different bases or quadratures")
    if not np.isclose(upper.symbol.order - lower.symbol.order, 2.0 * h, rtol=1e-9, atol=0.0):
        raise ProvenanceError(
            f"orders {lower.symbol.order} and {upper.symbol.order} are not 2h = {2.0 * h} apart"
        )
    return (upper.entries - lower.entries) / (2.0 * h)


def derivative_oracle_check(basis, params, quad, h, threads=None):
    """
    Max relative entry error between the fractional-log matrix and the central
    difference in the order of fractional matrices at s -+ h.
    """
    if not 0.0 < h < min(params.s, 1.0 - params.s) / 2.0:
        raise ValueError(f"h must lie in (0, min(s, 1-s)/2), got {h}")
    log_matrix = assemble_form_matrix(basis, params, quad, FRACTIONAL_LOG, threads=threads)
    upper = assemble_form_matrix(basis, params, quad, FRACTIONAL, order=params.s + h, threads=threads)
    lower = assemble_form_matrix(basis, params, quad, FRACTIONAL, order=params.s - h, threads=threads)
    difference = central_difference(upper, lower, h)
    scale = np.maximum(np.abs(log_matrix.entries), 1.0)
    return float(np.max(np.abs(difference - log_matrix.entries) / scale))


class PlaneWaveEnergy(NamedTuple):
    lhs: float
    main_term: float
    remainder: float
    mass: float


def cutoff_planewave_energy(params, profile, geom, r, quad, points=2 ** 16, padding=3.5):
    """
    Plane-wave energy of a boundary-layer cutoff w on an interval (0, L):

        lhs = int_{|z|<r} int m(xi) |w^(xi + z)|^2 dxi dz,

    split as M(r) int w^2 plus the remainder, with M(r) the ball integral of
    the symbol. The z-integral is exact through the antiderivative of m; w^
    comes from an FFT of w sampled on (-padding L, (1 + padding) L).
    """
    if params.n != 1 or geom.n != 1 or not geom.is_box:
        raise ValueError("the plane-wave probe is one-dimensional")
    length = geom.box_lengths[0]
    if not profile.sigma < length / 2.0:
        raise ValueError(f"sigma={profile.sigma} must be below half the length {length / 2.0}")
    radius = float(np.exp(1.0 / params.exponent))
    if r < radius:
        raise ValueError(f"r={r} is below the positivity radius {radius:.6g} of M(r)")

    total = (1.0 + 2.0 * padding) * length
    dx = total / points
    nyquist = np.pi / dx
    if nyquist < quad.cutoff_radius + r:
        raise ValueError(
            f"grid Nyquist frequency {nyquist:.6g} is below cutoff + r = {quad.cutoff_radius + r:.6g}"
        )

    x = -padding * length + dx * np.arange(points)
    samples = coremath.cutoff_value(profile, geom, x)
    power = dx ** 2 / (2.0 * np.pi) * np.abs(np.fft.fft(samples)) ** 2
    eta = 2.0 * np.pi * np.fft.fftfreq(points, d=dx)
    d_eta = 2.0 * np.pi / total

    kernel = coremath.symbol_antiderivative(params, eta + r) - coremath.symbol_antiderivative(params, eta - r)
    lhs = float(np.sum(power * kernel) * d_eta)
    mass = float(dx * np.sum(samples ** 2))
    main_term = float(coremath.ball_symbol_integral(params, r) * mass)
    return PlaneWaveEnergy(lhs=lhs, main_term=main_term, remainder=lhs - main_term, mass=mass)

"""Renormalized one- and two-loop operations on radial bubble integrands.

Measure: ``d^4k/(2 pi)^4 = k^3 dk / (8 pi^2)`` per loop after the angular
integration. The external direction is removed with the closed-form average
of the propagator over the three-sphere. Relative angles between loop
momenta carry the ``sin^2`` weight of the S^3 surface measure.

Subtraction is a Taylor expansion in the external invariant ``s = q^2``
around ``s0 = -m^2`` applied to the integrand, so the result and (for degree
2) its slope vanish at the point. The two-loop forests are hard-coded, see
:func:`two_loop`.

Radial integration runs in ``u = log(1 + k)`` with composite Gauss-Legendre
panels up to the cutoff. The tail beyond it is extrapolated from the
per-panel increments over the last decade with ``c k^-p (log k)^s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from ._weights import MASS2, propagator, weight_m1

__all__ = [
    "ForestDegreeError",
    "LoopConvergenceError",
    "LoopResult",
    "QuadratureConfig",
    "RadialWeight",
    "angular_average_propagator",
    "angular_average_slope",
    "finite_difference",
    "log_growth_exponent",
    "n2_tilde",
    "n3_derivative",
    "n3_tilde",
    "one_loop",
    "power_counting_degree",
    "radial_weight",
    "reference_point_values",
    "subtracted_kernel",
    "two_loop",
    "two_loop_slope",
]

LOOP_MEASURE = 1.0 / (8.0 * math.pi ** 2)
_SERIES_RATIO = 50.0
_SERIES_TERMS = 16


class LoopConvergenceError(ArithmeticError):
    """Quadrature did not reach the requested tolerance."""


class ForestDegreeError(ValueError):
    """Power counting gave a Taylor degree outside {0, 1, 2}."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-3
    abs_tol: float = 1e-14
    radial_cutoff: float = 1e12
    max_subdivisions: int = 128
    panel_width: float = 0.5
    nodes_per_panel: int = 6
    angle_nodes: int = 32

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if not self.radial_cutoff > 1.0:
            raise ValueError("radial_cutoff must exceed 1")
        if self.nodes_per_panel < 3 or self.angle_nodes < 4:
            raise ValueError("too few quadrature nodes")


@dataclass(frozen=True)
class LoopResult:
    value: float
    error_estimate: float
    subtraction_degree: int | None
    evaluations: int
    tail: float = 0.0


# --------------------------------------------------------------------------
# propagator kernels


def angular_average_propagator(k2, q2, m2=MASS2):
    """Average of ``1/((k+q)^2 + m^2)`` over directions of ``k``.

    Closed form ``2/(a + sqrt(a^2 - 4 k2 q2))`` with ``a = k2 + q2 + m2``.
    Valid (by continuation) for ``q2 >= -m2`` when ``k2 > 0``.

    >>> round(float(angular_average_propagator(1.0, 1.0)), 6)
    0.381966
    """
    k2 = np.asarray(k2, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    a = k2 + q2 + m2
    g = np.sqrt(np.maximum(a * a - 4.0 * k2 * q2, 0.0))
    with np.errstate(divide="ignore"):
        return 2.0 / (a + g)


def angular_average_slope(k2, q2, m2=MASS2):
    """Derivative of :func:`angular_average_propagator` with respect to ``q2``."""
    k2 = np.asarray(k2, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    a = k2 + q2 + m2
    g = np.sqrt(np.maximum(a * a - 4.0 * k2 * q2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return -2.0 * (1.0 + (a - 2.0 * k2) / g) / (a + g) ** 2


def _value_at_point(p2, m2):
    p = np.sqrt(p2)
    root = np.sqrt(p2 + 4.0 * m2)
    return 2.0 / (p * (p + root))


def _slope_at_point(p2, m2):
    # rationalized so that no cancellation happens near p2 -> 0
    p = np.sqrt(p2)
    root = np.sqrt(p2 + 4.0 * m2)
    return -8.0 * m2 / (root * (root + p) * p2 * (p + root) ** 2)


@lru_cache(maxsize=8)
def _remainder_polynomials(m2, order):
    """Large-p2 series of the Taylor remainder.

    With ``u = 1/p2`` the average is ``u * sum_k phi_k(s) u^k`` where
    ``phi_k = -(s+m2) phi_(k-1) + s * sum_i phi_i phi_(k-1-i)``.
    Returns coefficient rows ``c[k][j]`` of ``s^j`` in the remainder of
    ``phi_k`` after removing the Taylor terms at ``s0 = -m2``.
    """
    s = Polynomial([0.0, 1.0])
    a = Polynomial([m2, 1.0])
    phis = [Polynomial([1.0])]
    for k in range(1, _SERIES_TERMS + 1):
        conv = sum((phis[i] * phis[k - 1 - i] for i in range(k)), Polynomial([0.0]))
        phis.append(-a * phis[-1] + s * conv)
    s0 = -m2
    rows = []
    for phi in phis:
        rem = phi - phi(s0)
        if order >= 1:
            rem = rem - phi.deriv()(s0) * Polynomial([-s0, 1.0])
        coef = np.zeros(_SERIES_TERMS + 1)
        c = rem.coef
        coef[: len(c)] = c
        rows.append(coef)
    return np.array(rows)


def _series_remainder(p2, s, m2, order):
    rows = _remainder_polynomials(m2, order)
    u = 1.0 / p2
    su = s * u
    total = np.zeros(np.broadcast(p2, s).shape)
    for k in range(rows.shape[0] - 1, -1, -1):
        row = rows[k]
        term = np.zeros_like(total)
        for j in range(k, -1, -1):
            if row[j] != 0.0:
                term = term + row[j] * su ** j * u ** (k - j)
        total = total + term
    return u * total


def subtracted_kernel(p2, s, order, m2=MASS2):
    """Angular-averaged propagator minus its Taylor terms at ``s = -m2``.

    ``order`` is -1 (no subtraction), 0 (value) or 1 (value and slope).
    Far from the point a convergent series replaces the direct difference,
    which would lose all digits to cancellation.
    """
    p2 = np.asarray(p2, dtype=float)
    s = float(s)
    full = angular_average_propagator(p2, s, m2)
    if order < 0:
        return full
    direct = full - _value_at_point(p2, m2)
    if order >= 1:
        direct = direct - (s + m2) * _slope_at_point(p2, m2)
    far = p2 > _SERIES_RATIO * max(abs(s), m2)
    if np.any(far):
        direct = np.where(far, _series_remainder(np.where(far, p2, 1.0), s, m2, order),
                          direct)
    return direct


# --------------------------------------------------------------------------
# radial weights and power counting


class RadialWeight:
    """Callable line weight ``w(k^2)``.

    ``key`` (hashable or None) enables caching of the derived bubble.
    ``subgraph_subtracted`` is decided by power counting at construction.
    """

    def __init__(self, func, key=None):
        self.func = func
        self.key = key
        beta = _asymptotic_exponent(func)
        # the pair of weighted lines diverges iff 4 + 4 beta >= 0
        self.subgraph_subtracted = 4.0 + 4.0 * beta >= -1e-9

    def __call__(self, x):
        return self.func(x)


def radial_weight(variant: str, lam: float = 0.0) -> RadialWeight:
    """Weight multiplying each loop line besides the external one.

    ``weighted``: ``M1 * Delta^2`` (norm reference integrands);
    ``bare``: ``Delta`` (unit vertex, three free propagators);
    ``unit``: ``Delta^2`` (the norm integrand with ``M1`` set to one).
    """
    if variant == "weighted":
        return RadialWeight(lambda x: weight_m1(x, lam) * propagator(x) ** 2,
                            key=("weighted", float(lam)))
    if variant == "bare":
        return RadialWeight(propagator, key=("bare",))
    if variant == "unit":
        return RadialWeight(lambda x: propagator(x) ** 2, key=("unit",))
    raise ValueError(f"unknown integrand variant {variant!r}")


def _asymptotic_exponent(weight):
    x1, x2 = 1e10, 1e12
    w1, w2 = float(weight(x1)), float(weight(x2))
    if w1 <= 0 or w2 <= 0:
        raise ValueError("radial weight must be positive at large momenta")
    return math.log(w2 / w1) / math.log(x2 / x1)


def power_counting_degree(weight, loops: int) -> tuple[float, int | None]:
    """Superficial degree and Taylor degree for the bubble (1) or two-loop (2) graph.

    Every loop adds 4 powers, each weighted line ``2*beta`` and the external
    propagator -2. The Taylor degree is the integer part of a non-negative
    superficial degree; ``None`` means the integral converges as it stands.
    """
    beta = _asymptotic_exponent(weight)
    omega = 4.0 * loops + 2.0 * beta * loops - 2.0
    if loops == 2:
        # the one-loop subgraph must only diverge through q-independent terms
        sub = 4.0 + 2.0 * beta - 2.0
        if sub >= 2.0:
            raise ForestDegreeError(f"subgraph degree {sub:.3f} >= 2")
    if omega < -1e-9:
        return omega, None
    degree = int(math.floor(omega + 1e-9))
    if degree > 2:
        raise ForestDegreeError(f"Taylor degree {degree} exceeds 2 (omega={omega:.3f})")
    return omega, degree


def _taylor_order(degree):
    if degree is None:
        return -1
    return 1 if degree >= 2 else 0


# --------------------------------------------------------------------------
# quadrature grids


@lru_cache(maxsize=32)
def _radial_nodes(cutoff, panel_width, npp, max_panels):
    u_max = math.log1p(math.sqrt(cutoff))
    n_panels = max(1, math.ceil(u_max / panel_width))
    if n_panels > max_panels:
        raise ValueError(f"cutoff needs {n_panels} panels > max_subdivisions={max_panels}")
    edges = np.linspace(0.0, u_max, n_panels + 1)
    t, w = leggauss(npp)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wu = (half[:, None] * w[None, :]).ravel()
    k = np.expm1(u)
    # dk = e^u du, measure k^3 dk / (8 pi^2)
    wk = wu * np.exp(u) * k ** 3 * LOOP_MEASURE
    panel = np.repeat(np.arange(n_panels), npp)
    return k, wk, panel, edges


def _tail_from_increments(inc, edges):
    """Extrapolate the per-panel increments past the last edge."""
    width = edges[1] - edges[0]
    u_mid = 0.5 * (edges[1:] + edges[:-1])
    sel = u_mid >= edges[-1] - math.log(10.0)
    if sel.sum() < 3:
        sel = np.zeros_like(sel)
        sel[-3:] = True
    y = inc[sel]
    if np.all(y == 0):
        return 0.0, 0.0
    sign = np.sign(y[-1])
    if np.any(np.sign(y) != sign) or np.any(y == 0):
        # oscillating or noisy tail: no extrapolation, charge it to the error
        return 0.0, float(np.abs(y[-2:]).sum())
    x = u_mid[sel]
    ly = np.log(np.abs(y) / width)
    a_pow = np.vstack([np.ones_like(x), -x]).T
    (c0, p0), *_ = np.linalg.lstsq(a_pow, ly, rcond=None)
    a_log = np.vstack([np.ones_like(x), -x, np.log(x)]).T
    (c1, p1, s1), *_ = np.linalg.lstsq(a_log, ly, rcond=None)
    if p0 <= 0.05:
        raise LoopConvergenceError(f"tail does not decay (fitted power {p0:.3g})")
    u0 = edges[-1]
    tail_pow = math.exp(c0 - p0 * u0) / p0
    tail_log = tail_pow
    if p1 > 0.05 and abs(s1) < 20:
        tail_log, _ = quad(lambda v: math.exp(c1 - p1 * v + s1 * math.log(v)), u0, math.inf,
                           limit=200)
    return float(sign * tail_log), float(abs(tail_log - tail_pow))


# --------------------------------------------------------------------------
# integrators


def _panel_increments(vals, npp):
    """Sum node contributions per panel along the last axis."""
    shape = vals.shape[:-1] + (vals.shape[-1] // npp, npp)
    return vals.reshape(shape).sum(axis=-1)


def _refined_outer(values_at, kernel, s, k, wk, edges, npp, inc):
    """Re-integrate the panels around ``|p| = |q|`` with geometric refinement.

    The averaged external propagator has a cusp of width ``~ 1/|q|`` there,
    which fixed panels do not resolve once ``q^2`` is large.
    """
    if s <= 1.0:
        return inc
    u_q = math.log1p(math.sqrt(s))
    if u_q >= edges[-1]:
        return inc
    first = max(int(np.searchsorted(edges, u_q) - 2), 0)
    last = min(first + 3, len(edges) - 1)
    lo, hi = edges[first], edges[last]
    step = 1.0 / math.sqrt(s)
    cuts = {lo, hi, u_q}
    for j in range(12):
        for sign in (-1.0, 1.0):
            c = u_q + sign * step * 2.0 ** j
            if lo < c < hi:
                cuts.add(c)
    sub = np.array(sorted(cuts))
    t, w = leggauss(npp)
    half = 0.5 * np.diff(sub)
    mid = 0.5 * (sub[1:] + sub[:-1])
    u = (mid[:, None] + half[:, None] * t).ravel()
    wu = (half[:, None] * w).ravel()
    kk = np.expm1(u)
    x = kk * kk
    vals = wu * np.exp(u) * kk ** 3 * LOOP_MEASURE * values_at(x, u) * kernel(x)
    owner = np.clip(np.searchsorted(edges, u, side="right") - 1, first, last - 1)
    out = inc.copy()
    out[first:last] = np.bincount(owner - first, weights=vals, minlength=last - first)
    return out


def _one_loop_increments(weight, kernel, cfg, npp, s):
    k, wk, _, edges = _radial_nodes(cfg.radial_cutoff, cfg.panel_width, npp,
                                    cfg.max_subdivisions)
    x = k * k
    inc = _panel_increments(wk * weight(x) * kernel(x), npp)
    inc = _refined_outer(lambda xx, uu: weight(xx), kernel, s, k, wk, edges, npp, inc)
    return inc, edges, x.size


@lru_cache(maxsize=4)
def _theta_nodes(n_panels, npp):
    t, w = leggauss(npp)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return ((mid[:, None] + half[:, None] * t).ravel(),
            (half[:, None] * w).ravel())


def _half_angular_average(func, k_out, k_in, n_nodes=32):
    """Twice the S^3 average of ``func((p-k)^2)`` restricted to ``|k| <= |p-k|``.

    By the exchange symmetry of the two weighted lines this restricted
    region carries half of the bubble, and it avoids the sharp peak where
    the second line goes soft. ``|k| <= |p-k|`` means
    ``cos(theta) <= |p|/(2|k|)``.
    """
    kp = k_out[:, None, None]
    kk = k_in[None, :, None]
    theta_min = np.arccos(np.minimum(1.0, kp / (2.0 * kk)))
    t, w = _theta_nodes(1, n_nodes)
    theta = theta_min + (math.pi - theta_min) * t
    dtheta = (math.pi - theta_min) * w
    dist2 = (kp - kk) ** 2 + 4.0 * kp * kk * np.sin(0.5 * theta) ** 2
    return (4.0 / math.pi) * np.sum(np.sin(theta) ** 2 * func(dist2) * dtheta, axis=-1)


_BUBBLE_CACHE: dict = {}


def _subtracted_bubble(weight, cfg, npp):
    """``B(p^2) = int d^4k w(k)[<w(p-k)> - w(k)]`` on the outer radial nodes.

    This is the pair of weighted lines with its zero-momentum value removed
    (the only subgraph whose counterterm depends on the external momentum).
    Returns values at the outer nodes.
    """
    key = None
    if weight.key is not None:
        key = (weight.key, cfg.radial_cutoff, cfg.panel_width, cfg.max_subdivisions,
               cfg.angle_nodes, npp)
        if key in _BUBBLE_CACHE:
            return _BUBBLE_CACHE[key]
    k_out, _, _, _ = _radial_nodes(cfg.radial_cutoff, cfg.panel_width, npp,
                                   cfg.max_subdivisions)
    k_in, w_in, _, _ = _radial_nodes(cfg.radial_cutoff * 1e4, cfg.panel_width, npp,
                                     cfg.max_subdivisions + 20)
    x_in = k_in * k_in
    w_line = weight(x_in)
    out = np.empty(k_out.size)
    subtract = weight.subgraph_subtracted
    for lo in range(0, k_out.size, 16):
        rows = k_out[lo:lo + 16]
        avg = _half_angular_average(weight, rows, k_in, cfg.angle_nodes)
        vals = w_in * w_line * (avg - w_line if subtract else avg)
        inc = _panel_increments(vals, npp)
        # geometric extrapolation of the inner tail from the last two panels
        ratio = np.divide(inc[:, -1], inc[:, -2], out=np.zeros(len(rows)),
                          where=inc[:, -2] != 0)
        ratio = np.where((ratio > 0) & (ratio < 0.95), ratio, 0.0)
        out[lo:lo + 16] = inc.sum(axis=1) + inc[:, -1] * ratio / (1.0 - ratio)
    if key is not None:
        if len(_BUBBLE_CACHE) > 64:
            _BUBBLE_CACHE.clear()
        _BUBBLE_CACHE[key] = out
    return out


def _two_loop_increments(weight, kernel, cfg, npp, s):
    k, wk, _, edges = _radial_nodes(cfg.radial_cutoff, cfg.panel_width, npp,
                                    cfg.max_subdivisions)
    x = k * k
    bubble = _subtracted_bubble(weight, cfg, npp)
    inc = _panel_increments(wk * kernel(x) * bubble, npp)
    if s > 1.0:
        spline = CubicSpline(np.log1p(k), bubble)
        inc = _refined_outer(lambda xx, uu: spline(uu), kernel, s, k, wk, edges, npp, inc)
    return inc, edges, x.size * (k.size * 2)


def _integrate(increments, weight, kernel, cfg, degree, s):
    inc, edges, n_eval = increments(weight, kernel, cfg, cfg.nodes_per_panel, s)
    inc_lo, _, n_lo = increments(weight, kernel, cfg, cfg.nodes_per_panel - 2, s)
    tail, tail_err = _tail_from_increments(inc, edges)
    value = float(inc.sum()) + tail
    err = abs(float(inc.sum() - inc_lo.sum())) + tail_err
    return LoopResult(value=value, error_estimate=err, subtraction_degree=degree,
                      evaluations=n_eval + n_lo, tail=tail)


def _check(result, cfg, what):
    bound = cfg.rel_tol * abs(result.value) + cfg.abs_tol
    if not math.isfinite(result.value) or result.error_estimate > bound:
        raise LoopConvergenceError(
            f"{what}: error {result.error_estimate:.3g} exceeds {bound:.3g}")
    return result


def _as_weight(weight):
    return weight if isinstance(weight, RadialWeight) else RadialWeight(weight)


def one_loop(q2, weight, cfg: QuadratureConfig | None = None, degree="auto",
             m2=MASS2, check=True) -> LoopResult:
    """``int d^4k/(2pi)^4 weight(k^2) <Delta(k+q)>``, Taylor-subtracted as needed."""
    cfg = cfg or QuadratureConfig()
    weight = _as_weight(weight)
    if degree == "auto":
        _, degree = power_counting_degree(weight, 1)
    order = _taylor_order(degree)
    res = _integrate(_one_loop_increments, weight,
                     lambda x: subtracted_kernel(x, q2, order, m2), cfg, degree, q2)
    return _check(res, cfg, f"one-loop at q2={q2}") if check else res


def two_loop(q2, weight, cfg: QuadratureConfig | None = None, degree="auto",
             m2=MASS2, check=True) -> LoopResult:
    """``int w(k1^2) w(k2^2) <Delta(k1+k2+q)>`` over both loops, renormalized.

    With ``p = k1 + k2`` the integral factorizes into the bubble ``B(p^2)`` of
    the two weighted lines and the external line. Forests: the overall Taylor
    operator at ``q^2 = -m^2`` acts on the external line, the (w, w) subgraph
    is subtracted at zero momentum inside ``B``; the (w, Delta) subgraphs only
    produce q-independent counterterms, which the overall operator removes.
    """
    cfg = cfg or QuadratureConfig()
    weight = _as_weight(weight)
    if degree == "auto":
        _, degree = power_counting_degree(weight, 2)
    order = _taylor_order(degree)
    res = _integrate(_two_loop_increments, weight,
                     lambda p2: subtracted_kernel(p2, q2, order, m2), cfg, degree, q2)
    return _check(res, cfg, f"two-loop at q2={q2}") if check else res


def _check_q2(q2, m2=MASS2):
    if not q2 >= -m2:
        raise ValueError(f"q2 must be >= -m^2, got {q2}")


def n2_tilde(q2: float, lam: float, cfg: QuadratureConfig | None = None,
             variant: str = "weighted") -> LoopResult:
    """Renormalized bubble of the norm reference integrand ``M1 Delta^2 Delta(k+q)``."""
    _check_q2(q2)
    return one_loop(q2, radial_weight(variant, lam), cfg)


def n3_tilde(q2: float, lam: float, cfg: QuadratureConfig | None = None,
             variant: str = "weighted") -> LoopResult:
    """Renormalized two-loop operation.

    ``variant="weighted"`` is the norm reference integrand with ``M1 Delta^2`` on
    both loop lines; ``"bare"`` is the three-propagator unit-vertex integral.
    """
    _check_q2(q2)
    return two_loop(q2, radial_weight(variant, lam), cfg)


def finite_difference(func, q2, m2=MASS2):
    """q^2-derivative with step ``max(1e-3 (q^2+m^2), 1e-6)``, one Richardson pass.

    Central differences where the stencil stays at or above ``-m^2``,
    otherwise a second-order forward stencil.
    """
    h = max(1e-3 * (q2 + m2), 1e-6)

    def stencil(step):
        if q2 - step >= -m2:
            return (func(q2 + step) - func(q2 - step)) / (2.0 * step)
        return (-3.0 * func(q2) + 4.0 * func(q2 + step) - func(q2 + 2.0 * step)) / (2.0 * step)

    coarse, fine = stencil(h), stencil(0.5 * h)
    return (4.0 * fine - coarse) / 3.0, abs(fine - coarse)


def two_loop_slope(q2: float, weight, cfg: QuadratureConfig | None = None,
                   degree="auto") -> LoopResult:
    """q^2-derivative of :func:`two_loop` by Richardson-extrapolated differences.

    The quadrature rule is the same at every stencil point, so its error
    varies smoothly with ``q^2``; it enters the slope relative to the stencil
    values rather than divided by the step.
    """
    cfg = cfg or QuadratureConfig()
    weight = _as_weight(weight)
    if degree == "auto":
        _, degree = power_counting_degree(weight, 2)
    results = []

    def value(s):
        r = two_loop(s, weight, cfg, degree=degree, check=False)
        results.append(r)
        return r.value

    deriv, fd_err = finite_difference(value, q2)
    size = max(abs(r.value) for r in results)
    rel = max(r.error_estimate for r in results) / size if size > 0 else 0.0
    return LoopResult(value=float(deriv), error_estimate=float(fd_err + rel * abs(deriv)),
                      subtraction_degree=degree,
                      evaluations=sum(r.evaluations for r in results))


def n3_derivative(q2: float, lam: float, cfg: QuadratureConfig | None = None,
                  variant: str = "weighted") -> LoopResult:
    """q^2-derivative of :func:`n3_tilde`."""
    _check_q2(q2)
    return two_loop_slope(q2, radial_weight(variant, lam), cfg)


def reference_point_values(lam: float, cfg: QuadratureConfig | None = None,
                           variant: str = "bare") -> dict:
    """Value and slope at ``q^2 = -m^2`` of the normalized two-loop operation.

    The operation acting on a unit vertex is ``(q^2 + m^2) + R(q^2)`` where
    ``R`` is the subtracted loop remainder: the first term is its
    zero-dimensional normalization carried to four dimensions.
    """
    cfg = cfg or QuadratureConfig()
    weight = radial_weight(variant, lam)
    _, degree = power_counting_degree(weight, 2)
    point = -MASS2
    val = two_loop(point, weight, cfg, degree=degree, check=False).value
    slope, _ = finite_difference(
        lambda s: two_loop(s, weight, cfg, degree=degree, check=False).value, point)
    return {"n3_at_point": 0.0 + val, "dn3_at_point": 1.0 + slope}


def with_cutoff(cfg: QuadratureConfig, cutoff: float) -> QuadratureConfig:
    return replace(cfg, radial_cutoff=cutoff)


def log_growth_exponent(q2, values, m2=MASS2) -> tuple[float, float]:
    """Exponent ``p`` of ``values ~ c L^p`` with ``L = log(q^2 + m^2)``.

    The model carries a constant and finite-mass corrections
    ``(e + f L)/(q^2 + m^2)`` so that moderate momenta can enter the fit.
    Returns ``(p, standard error)``.
    """
    from scipy.optimize import curve_fit

    q2 = np.asarray(q2, dtype=float)
    v = np.asarray(values, dtype=float)
    s = q2 + m2
    logs = np.log(s)
    scale = v[np.argmax(np.abs(v))]

    def model(x, a, c, p, e, f):
        return a + c * x[0] ** p + (e + f * x[0]) / x[1]

    popt, pcov = curve_fit(model, np.vstack([logs, s]), v / scale,
                           p0=[0.0, 0.1, 1.0, 0.0, 0.0], maxfev=20000)
    return float(popt[2]), float(math.sqrt(max(pcov[2, 2], 0.0)))

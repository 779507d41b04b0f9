"""Weighted sup-norm on sampled sequences, the induced distance and the ball radius.

The norm takes the largest of four families of ratios:

* ``|H^{n+1}| / M_n`` (two-point on the radial grid, higher orders on scales),
* the one-loop bubble ``[N2 H^{n+1}]`` over ``M^(n,2)``,
* the slope of the two-loop operation on ``H^4`` over ``M^(0,1)_3``,
* ``|gamma| / N_gamma``.

Sup over momenta is a max over the grid points. Weights that need loop
integrals are lowered by their quadrature error so ratios err on the large side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _seqloops as sl
from ._weights import M1_EXPONENT, MASS2, propagator, weight_m1
from .loops import QuadratureConfig, RadialWeight, one_loop, radial_weight
from .splitting import default_d0, delta_bounds, gamma_max
from .trees import GreenSequence, MomentumConfig, four_dim_constants

__all__ = [
    "NormWeights",
    "ball_radius_r0",
    "banach_norm",
    "build_norm_weights",
    "distance",
    "distance_band",
    "distance_entries",
    "envelope_exponent",
    "h2_envelope",
    "norm_entries",
    "relative_quadrature_error",
    "weight_m1",
]

FAMILIES = ("tree", "n2", "n3_slope", "gamma")


def envelope_exponent(nu: int | None = None) -> float:
    """``(1/3) sum_{k <= nu} 1/k^2`` (tends to ``pi^2/18``).

    ``nu=None`` gives the fixed exponent ``pi^2/54`` shared with ``M1``, which
    is the tighter envelope used for membership checks.
    """
    if nu is None:
        return M1_EXPONENT
    return sum(1.0 / k ** 2 for k in range(1, nu + 1)) / 3.0


def h2_envelope(q2, lam, nu: int | None = None):
    """``(H2_min, H2_max)``: ``q^2+m^2`` and ``gamma_max((q^2+m^2) + 6 lam^2 (q^2+m^2)^e)``.

    ``e`` follows :func:`envelope_exponent`.
    """
    s = np.asarray(q2, dtype=float) + MASS2
    return s, gamma_max(lam) * (s + 6.0 * lam ** 2 * s ** envelope_exponent(nu))


@dataclass(eq=False)
class NormWeights:
    lam: float
    n_max: int
    q2: np.ndarray
    scales: tuple
    pattern: str
    m1: np.ndarray
    m_n: dict
    m_hat_n2: dict
    m_hat3: np.ndarray
    n_gamma: float
    cfg: QuadratureConfig

    def matches(self, seq: GreenSequence) -> bool:
        return (seq.lam == self.lam and seq.n_max <= self.n_max
                and tuple(seq.scales) == tuple(self.scales) and seq.pattern == self.pattern
                and np.array_equal(seq.q2[seq.nonneg], self.q2))


def _bubble_p2(scales, pattern):
    probe = MomentumConfig(1, 1.0, pattern)
    return probe.invariant(2) * np.asarray(scales, dtype=float) ** 2


def build_norm_weights(lam: float, q2, scales, pattern: str = "isotropic", n_max: int = 7,
                       cfg: QuadratureConfig | None = None,
                       d0: float | None = None) -> NormWeights:
    """Tabulate every weight for one coupling on the given grids (``q2 >= 0`` only)."""
    if not lam > 0:
        raise ValueError("norm weights need lambda > 0")
    cfg = cfg or QuadratureConfig()
    d0 = default_d0(lam) if d0 is None else d0
    q2 = np.asarray(q2, dtype=float)
    q2 = q2[q2 >= 0]
    t2 = np.asarray(scales, dtype=float) ** 2
    probe = MomentumConfig(1, 1.0, pattern)
    m1 = weight_m1(q2, lam)
    m1d = weight_m1(t2, lam) * propagator(t2)
    consts = four_dim_constants(lam, cfg)
    m_n = {3: 6.0 * lam * m1d ** 3}
    for n in range(5, n_max + 1, 2):
        d_max = delta_bounds(n, lam, consts, d0)[1]
        m_n[n] = n * (n - 1) * d_max * m_n[n - 2] * propagator(probe.invariant(n - 2) * t2) * m1d ** 2
    weighted = radial_weight("weighted", lam)
    bub = [one_loop(p, weighted, cfg) for p in _bubble_p2(scales, pattern)]
    r2w = np.array([max(abs(r.value) - r.error_estimate, 0.0) for r in bub])
    m_hat_n2 = {n: m_n[n] / m1d * r2w for n in m_n}
    slope, err = sl.slopes(weighted, q2, cfg)
    m_hat3 = 6.0 * lam * np.maximum(np.abs(slope) - err, 0.0)
    n_gamma = gamma_max(lam) * float(weight_m1(0.0, lam)) ** 3
    return NormWeights(lam, n_max, q2, tuple(scales), pattern, m1, m_n, m_hat_n2,
                       m_hat3, n_gamma, cfg)


# --------------------------------------------------------------------------
# per-sequence quantities entering the norm


def _zero_index(seq):
    return int(np.argmin(np.asarray(seq.scales)))


def _delta3_at_zero(seq):
    i = _zero_index(seq)
    g0 = float(seq.g(seq.scales[i] ** 2))
    return 0.0 if g0 == 0 else -float(seq.h[3][i]) / g0 ** 3


def gamma_value(seq) -> float:
    """``-6 lam prod(H^2 Delta) / H^4`` at the smallest scale; 0 for a vanishing ``H^4``."""
    i = _zero_index(seq)
    h4 = float(seq.h[3][i])
    if h4 == 0.0:
        return 0.0
    return -6.0 * seq.lam * float(seq.g(seq.scales[i] ** 2)) ** 3 / h4


def _n2_values(seq, cfg):
    p2 = _bubble_p2(seq.scales, seq.pattern)
    r, _ = sl.r2(seq, p2, cfg)
    g = seq.g(np.asarray(seq.scales, dtype=float) ** 2)
    safe = np.where(g != 0, g, 1.0)
    return {n: np.where(g != 0, seq.h[n] / safe * r, 0.0) for n in range(3, seq.n_max + 1, 2)}


def _n3_slope_values(seq, cfg):
    slope, _ = sl.j3_slope(seq, cfg)
    return _delta3_at_zero(seq) * slope


def _quantities(seq, w: NormWeights):
    if not w.matches(seq):
        raise ValueError("sequence grids do not match the norm weights")
    return {
        "h2": seq.h2[seq.nonneg],
        "h": seq.h,
        "n2": _n2_values(seq, w.cfg),
        "n3": _n3_slope_values(seq, w.cfg),
        "gamma": gamma_value(seq),
    }


def _entries(qa, qb, w: NormWeights, n_max):
    diff = (lambda x, y: x - y) if qb is not None else (lambda x, y: x)
    qb = qb or {"h2": None, "h": {}, "n2": {}, "n3": None, "gamma": None}
    tree = float(np.max(np.abs(diff(qa["h2"], qb["h2"])) / w.m1))
    for n in range(3, n_max + 1, 2):
        tree = max(tree, float(np.max(np.abs(diff(qa["h"][n], qb["h"].get(n))) / w.m_n[n])))
    n2 = max(float(np.max(np.abs(diff(qa["n2"][n], qb["n2"].get(n))) / w.m_hat_n2[n]))
             for n in range(3, n_max + 1, 2))
    n3 = float(np.max(np.abs(diff(qa["n3"], qb["n3"])) / w.m_hat3))
    gam = abs(diff(qa["gamma"], qb["gamma"])) / w.n_gamma
    return {"tree": tree, "n2": n2, "n3_slope": n3, "gamma": gam}


def norm_entries(h: GreenSequence, w: NormWeights) -> dict:
    return _entries(_quantities(h, w), None, w, h.n_max)


def banach_norm(h: GreenSequence, w: NormWeights) -> float:
    return max(norm_entries(h, w).values())


def distance_entries(h1: GreenSequence, h2: GreenSequence, w: NormWeights) -> dict:
    if h1.n_max != h2.n_max or not np.array_equal(h1.q2, h2.q2) \
            or tuple(h1.scales) != tuple(h2.scales):
        raise ValueError("grid mismatch between sequences")
    return _entries(_quantities(h1, w), _quantities(h2, w), w, h1.n_max)


def distance(h1: GreenSequence, h2: GreenSequence, w: NormWeights) -> float:
    """Norm of the difference; the gamma entry is ``|gamma_1 - gamma_2| / N_gamma``."""
    return max(distance_entries(h1, h2, w).values())


def relative_quadrature_error(h: GreenSequence, w: NormWeights) -> float:
    """Largest relative error estimate among the loop quantities of ``h``."""
    if sl.is_zero(h):
        return 0.0
    v, e = sl.j3(h, w.cfg)
    size = float(np.max(np.abs(v)))
    rel = float(np.max(e)) / size if size > 0 else 0.0
    v, e = sl.j3_slope(h, w.cfg)
    mask = v != 0
    if np.any(mask):
        rel = max(rel, float(np.max(e[mask] / np.abs(v[mask]))))
    return rel


def distance_band(h1: GreenSequence, h2: GreenSequence, w: NormWeights,
                  d: float | None = None) -> float:
    """Uncertainty of ``distance(h1, h2)`` from quadrature.

    The same rule acts on both sequences, so its error on the difference is
    relative to the difference itself.
    """
    d = distance(h1, h2, w) if d is None else d
    return d * max(relative_quadrature_error(h1, w), relative_quadrature_error(h2, w))


def ball_radius_r0(lam: float, w: NormWeights, d0: float | None = None) -> dict:
    """Largest of the three envelope gaps: splitting, two-point, two-loop slope.

    Returns the components and ``r0`` (their maximum).
    """
    d0 = default_d0(lam) if d0 is None else d0
    cfg = w.cfg
    consts = four_dim_constants(lam, cfg)
    split = 0.0
    for n in range(3, w.n_max + 1, 2):
        lo, hi = delta_bounds(n, lam, consts, d0)
        split = max(split, (hi - lo) / hi)
    h2min, h2max = h2_envelope(w.q2, lam)
    two_point = float(np.max(np.abs(h2max - h2min) / h2max))
    d3min, d3max = delta_bounds(3, lam, consts, d0)
    g = gamma_max(lam)
    upper = RadialWeight(
        lambda x: g * (1.0 + 6.0 * lam ** 2 * (np.asarray(x) + MASS2) ** (M1_EXPONENT - 1.0))
        * propagator(x), key=("h2max", float(lam)))
    s_max, _ = sl.slopes(upper, w.q2, cfg)
    s_min, _ = sl.slopes(radial_weight("bare"), w.q2, cfg)
    slope = float(np.max(np.abs(d3max * s_max - d3min * s_min) / w.m_hat3))
    r0 = max(split, two_point, slope)
    if not 0.0 < r0 <= 1.0 or not math.isfinite(r0):
        raise ArithmeticError(f"ball radius {r0} outside (0, 1]")
    return {"splitting": split, "two_point": two_point, "n3_slope": slope, "r0": r0}

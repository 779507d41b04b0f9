"""Loop integrals that depend on a sampled sequence, cached on the sequence.

Inside loops every splitting function is taken at zero momentum, so the only
state the integrals see is the line weight ``H^2 Delta^2 = g Delta``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._weights import MASS2, propagator
from .loops import (
    LoopResult,
    QuadratureConfig,
    RadialWeight,
    one_loop,
    power_counting_degree,
    radial_weight,
    two_loop,
    two_loop_slope,
)


def line_weight(seq) -> RadialWeight:
    key = ("green", seq.fingerprint())
    return RadialWeight(lambda x: seq.g(x) * propagator(x), key=key)


def is_zero(seq) -> bool:
    return not np.any(seq.h2)


@lru_cache(maxsize=4096)
def kappa2(p2: float, cfg: QuadratureConfig) -> tuple[float, float]:
    """Normalized one-loop kernel ``1 + R2(p^2)`` on free lines, with its error."""
    r = one_loop(p2, radial_weight("bare"), cfg)
    return 1.0 + r.value, r.error_estimate


@lru_cache(maxsize=4096)
def kappa3(p2: float, cfg: QuadratureConfig) -> tuple[float, float]:
    """Normalized two-loop kernel ``1 + R3(p^2) Delta(p^2)`` on free lines."""
    r = two_loop(p2, radial_weight("bare"), cfg)
    d = float(propagator(p2))
    return 1.0 + r.value * d, r.error_estimate * d


def _cached(seq, key, build):
    if key not in seq.cache:
        seq.cache[key] = build()
    return seq.cache[key]


def j3(seq, cfg: QuadratureConfig):
    """Renormalized two-loop ``J3[g]`` on ``seq.q2`` with ``g Delta`` on both loop lines."""
    def build():
        if is_zero(seq):
            z = np.zeros_like(seq.q2)
            return z, z
        w = line_weight(seq)
        _, degree = power_counting_degree(w, 2)
        res = [two_loop(x, w, cfg, degree=degree) for x in seq.q2]
        return (np.array([r.value for r in res]), np.array([r.error_estimate for r in res]))
    return _cached(seq, ("j3", cfg), build)


def slopes(weight: RadialWeight, q2s, cfg: QuadratureConfig):
    _, degree = power_counting_degree(weight, 2)
    out = [two_loop_slope(float(x), weight, cfg, degree) for x in q2s]
    return np.array([r.value for r in out]), np.array([r.error_estimate for r in out])


def j3_slope(seq, cfg: QuadratureConfig):
    """q^2-slope of ``J3[g]`` on the non-negative grid points."""
    def build():
        q = seq.q2[seq.nonneg]
        if is_zero(seq):
            return np.zeros_like(q), np.zeros_like(q)
        return slopes(line_weight(seq), q, cfg)
    return _cached(seq, ("j3_slope", cfg), build)


def j3_slope_at_point(seq, cfg: QuadratureConfig) -> float:
    def build():
        if is_zero(seq):
            return 0.0
        v, _ = slopes(line_weight(seq), [-MASS2], cfg)
        return float(v[0])
    return _cached(seq, ("j3_slope_point", cfg), build)


def r2(seq, p2s, cfg: QuadratureConfig):
    """Degree-0 subtracted bubble with ``g Delta`` on the loop line, at ``p2s``."""
    p2s = tuple(float(x) for x in p2s)

    def build():
        if is_zero(seq):
            z = np.zeros(len(p2s))
            return z, z
        w = line_weight(seq)
        res: list[LoopResult] = [one_loop(x, w, cfg) for x in p2s]
        return (np.array([r.value for r in res]), np.array([r.error_estimate for r in res]))
    return _cached(seq, ("r2", p2s, cfg), build)

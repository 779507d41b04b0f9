"""Sampled Green's sequences, tree evaluation and the fundamental sequence.

Two-point functions live on a radial ``q^2`` grid. Higher orders are kept on
one-parameter symmetric configurations: every external momentum has size
``t`` and the subset sums a tree needs have invariants ``s_i t^2``, with
``s_i = i`` (mutually orthogonal directions) or ``s_i = i^2`` (collinear).
A tree leg carrying ``i`` momenta contributes ``H^{i+1}(t) Delta(s_i t^2)``;
the bubble it ends on is evaluated at the same scale ``t``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._weights import MASS2, propagator
from .combinatorics import triple_partitions
from .loops import QuadratureConfig, radial_weight, reference_point_values, two_loop
from .splitting import (
    FOUR_DIM,
    RenormBoundConstants,
    default_d0,
    renorm_bound_constants,
    splitting_bounds,
)

__all__ = [
    "DEFAULT_SCALES",
    "NEAR_POINT_OFFSETS",
    "PATTERNS",
    "RADIAL_Q2",
    "GreenSequence",
    "MomentumConfig",
    "RenormConstants",
    "TreeSequence",
    "build_fundamental",
    "eval_tree",
    "four_dim_constants",
    "leg_factors",
    "splitting_at",
    "splitting_numerator",
    "standard_q2_grid",
    "tree_term",
]

RADIAL_Q2 = np.geomspace(1e-4, 1e6, 64)
NEAR_POINT_OFFSETS = (1e-6, 1e-4, 1e-2)
DEFAULT_SCALES = (0.0, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0)
_LOOP_KEYS = ("j3", "j3_slope", "j3_slope_point", "r2", "bound_constants")
PATTERNS = {"isotropic": lambda i: float(i), "collinear": lambda i: float(i * i)}


def standard_q2_grid(points: int = 64) -> np.ndarray:
    """Near-point offsets, zero and a geometric grid on ``[1e-4, 1e6]``, sorted."""
    near = [-MASS2 + e for e in NEAR_POINT_OFFSETS]
    return np.array(sorted(near + [0.0] + list(np.geomspace(1e-4, 1e6, points))))


def splitting_numerator(n: int, lam: float) -> float:
    """``6 lam`` for the four-point function, ``3 lam n(n-1)`` above it."""
    return 6.0 * lam if n == 3 else 3.0 * lam * n * (n - 1)


@dataclass(frozen=True)
class MomentumConfig:
    n: int
    scale: float
    pattern: str = "isotropic"

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError(f"order must be odd, got {self.n}")
        if not self.scale >= 0:
            raise ValueError(f"scale must be >= 0, got {self.scale}")
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}")

    def invariant(self, i: int) -> float:
        """Squared momentum flowing through a leg that carries ``i`` external momenta."""
        return PATTERNS[self.pattern](i) * self.scale ** 2


@dataclass(frozen=True)
class RenormConstants:
    gamma: float
    rho: float
    a: float


@dataclass(eq=False)
class GreenSequence:
    """Truncated sequence: ``h2`` on ``q2``, ``h[n]`` on ``scales`` for ``3 <= n <= n_max``.

    ``constants`` are the renormalization constants the sequence was built
    with (the values that enter the mapping denominators); ``nu`` counts
    mapping steps from the fundamental sequence.
    """

    lam: float
    n_max: int
    q2: np.ndarray
    h2: np.ndarray
    h: dict
    scales: tuple = DEFAULT_SCALES
    pattern: str = "isotropic"
    constants: RenormConstants = RenormConstants(1.0, 0.0, 0.0)
    nu: int = 0
    d0: float | None = None
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.n_max < 3 or self.n_max % 2 == 0:
            raise ValueError(f"n_max must be odd and >= 3, got {self.n_max}")
        self.q2 = np.asarray(self.q2, dtype=float)
        self.h2 = np.asarray(self.h2, dtype=float)
        if self.q2.shape != self.h2.shape or np.any(np.diff(self.q2) <= 0):
            raise ValueError("q2 must be strictly increasing and match h2")
        self.h = {int(n): np.asarray(v, dtype=float) for n, v in self.h.items()}
        for n in range(3, self.n_max + 1, 2):
            if n not in self.h or self.h[n].shape != (len(self.scales),):
                raise ValueError(f"missing samples for order {n}")
        if self.d0 is None:
            self.d0 = default_d0(self.lam)

    # -- two-point function -------------------------------------------------

    def fingerprint(self) -> str:
        """Hash of the two-point samples; identifies loop integrals built on them."""
        return hashlib.sha256(self.q2.tobytes() + self.h2.tobytes()).hexdigest()[:16]

    def g(self, x):
        """``H^2 Delta`` at arbitrary ``x >= -m^2``.

        Linear interpolation in ``log(q^2 + 2 m^2)``, anchored at the
        point where ``H^2 Delta = 1``, and linear extrapolation beyond the grid.
        """
        key = "g_interp"
        if key not in self.cache:
            mask = self.q2 > -MASS2
            xs = np.concatenate([[-MASS2], self.q2[mask]])
            gs = np.concatenate([[1.0], self.h2[mask] * propagator(self.q2[mask])])
            self.cache[key] = (np.log(xs + 2.0 * MASS2), gs)
        w, gs = self.cache[key]
        v = np.log(np.asarray(x, dtype=float) + 2.0 * MASS2)
        out = np.interp(v, w, gs)
        slope = (gs[-1] - gs[-2]) / (w[-1] - w[-2])
        return np.where(v > w[-1], gs[-1] + slope * (v - w[-1]), out)

    def h2_at(self, x):
        return self.g(x) * (np.asarray(x, dtype=float) + MASS2)

    @property
    def nonneg(self) -> np.ndarray:
        return self.q2 >= 0

    # -- higher orders --------------------------------------------------------

    def value(self, n: int) -> np.ndarray:
        """``H^{n+1}`` on the scales; ``n = 1`` gives ``H^2`` at ``q^2 = t^2``."""
        if n == 1:
            return self.h2_at(np.asarray(self.scales) ** 2)
        if n > self.n_max:
            raise KeyError(f"order {n} beyond n_max={self.n_max}")
        return self.h[n]

    def config(self, n: int, i: int) -> MomentumConfig:
        return MomentumConfig(n, self.scales[i], self.pattern)

    def with_updates(self, **kw) -> GreenSequence:
        """Copy with fields replaced.

        Loop integrals depend on the two-point samples only, so their cache
        entries survive when ``q2``, ``h2`` and ``lam`` are untouched.
        """
        if "cache" not in kw:
            keep = not {"q2", "h2", "lam"} & kw.keys()
            kw["cache"] = {k: v for k, v in self.cache.items()
                           if keep and (k == "g_interp" or (isinstance(k, tuple) and k[0] in _LOOP_KEYS))}
        return replace(self, **kw)


@dataclass(eq=False)
class TreeSequence(GreenSequence):
    """A sequence whose every order is a sum of tree graphs over its splitting values.

    ``b0, b1`` describe the two-point function through
    ``H^2 <= (q^2+m^2)(b0 + b1 (q^2+m^2)^(pi^2/18))``.
    """

    deltas: dict = field(default_factory=dict)
    b0: float = 1.0
    b1: float = 0.0


def leg_factors(seq: GreenSequence, n_top: int, values=None) -> dict:
    """Leg factors ``L_i(t)`` for odd ``i < n_top`` on the sequence scales."""
    values = values or {}
    t2 = np.asarray(seq.scales, dtype=float) ** 2
    probe = MomentumConfig(1, 1.0, seq.pattern)
    legs = {1: values.get(1, seq.g(t2))}
    for i in range(3, n_top, 2):
        hv = values[i] if i in values else seq.value(i)
        legs[i] = hv * propagator(probe.invariant(i) * t2)
    return legs


def tree_term(legs: dict, n: int, lam: float) -> np.ndarray:
    """``C^{n+1} = -6 lam sum_I w_I L_i1 L_i2 L_i3``."""
    out = 0.0
    for p in triple_partitions(n):
        i1, i2, i3 = p.parts
        out = out + float(p.weight) * legs[i1] * legs[i2] * legs[i3]
    return -6.0 * lam * np.asarray(out, dtype=float)


def four_dim_constants(lam: float, cfg: QuadratureConfig | None = None,
                       variant: str = "bare") -> RenormBoundConstants:
    return renorm_bound_constants(lam, FOUR_DIM, reference_point_values(lam, cfg, variant))


def build_fundamental(lam: float, cfg: QuadratureConfig | None = None, n_max: int = 7,
                      scales=DEFAULT_SCALES, pattern: str = "isotropic",
                      d0: float | None = None, q2=None) -> TreeSequence:
    """Fundamental tree sequence: minimal splitting values and constants.

    ``H^2 = (q^2+m^2)(1 + delta_10 Delta)`` with
    ``delta_10 Delta = (-rho0 + lam d3min ([N3] - [N3]_0) Delta) / (1 + rho0)``
    where ``[N3] = (q^2+m^2) + R(q^2)`` is the normalized two-loop operation on
    the unit vertex.
    """
    if not 0.0 < lam <= 0.05:
        raise ValueError(f"lambda must lie in (0, 0.05], got {lam}")
    cfg = cfg or QuadratureConfig()
    d0 = default_d0(lam) if d0 is None else d0
    consts = four_dim_constants(lam, cfg)
    bounds = splitting_bounds(lam, n_max, consts, d0)
    d3min = bounds.lower(3)
    q2 = standard_q2_grid() if q2 is None else np.asarray(q2, dtype=float)
    weight = radial_weight("bare")
    remainder = np.array([two_loop(x, weight, cfg).value for x in q2])
    s = q2 + MASS2
    n3 = s + remainder
    delta10 = (-consts.rho0 + lam * d3min * (n3 - consts.n3_at_point) / s) / (1.0 + consts.rho0)
    h2 = s * (1.0 + delta10)
    # gamma0 = 1 and the minimal constants
    renorm = RenormConstants(gamma=consts.gamma0, rho=consts.rho0, a=consts.a0)
    seq = TreeSequence(lam=lam, n_max=n_max, q2=q2, h2=h2, h={n: np.zeros(len(scales))
                       for n in range(3, n_max + 1, 2)}, scales=tuple(scales),
                       pattern=pattern, constants=renorm, nu=0, d0=d0)
    seq.deltas = {n: np.full(len(scales), bounds.lower(n)) for n in range(3, n_max + 1, 2)}
    pos = q2 >= 0
    seq.b0 = 1.0
    seq.b1 = float(max(0.0, np.max(delta10[pos] / s[pos] ** (math.pi ** 2 / 18))))
    seq.cache["bounds"] = bounds
    seq.cache["bound_constants"] = consts
    for n in range(3, n_max + 1, 2):
        seq.h[n] = eval_tree(seq, n)
    return seq


def eval_tree(seq: TreeSequence, n: int, config: MomentumConfig | None = None):
    """Tree value ``H^{n+1}`` from the splitting values and the two-point function.

    Without ``config`` returns the values on all scales of the sequence.
    """
    if n > seq.n_max:
        raise ValueError(f"order {n} exceeds n_max={seq.n_max}")
    memo = seq.cache.setdefault("tree", {})
    if n not in memo:
        lam = seq.lam
        t2 = np.asarray(seq.scales, dtype=float) ** 2
        if n == 3:
            memo[n] = -seq.deltas[3] * seq.g(t2) ** 3
        else:
            vals = {i: eval_tree(seq, i) for i in range(3, n, 2)}
            legs = leg_factors(seq, n, vals)
            memo[n] = seq.deltas[n] * tree_term(legs, n, lam) / splitting_numerator(n, lam)
    out = memo[n]
    if config is None:
        return out
    if config.n != n or config.pattern != seq.pattern:
        raise ValueError("configuration does not match the order or pattern")
    if config.scale in seq.scales:
        return float(out[seq.scales.index(config.scale)])
    return _tree_at_scale(seq, n, config)


def _tree_at_scale(seq, n, config):
    # off-grid scale: evaluate the recursion directly at one scale
    lam = seq.lam
    t2 = config.scale ** 2
    delta = {m: float(np.interp(config.scale, seq.scales, seq.deltas[m]))
             for m in range(3, n + 1, 2)}
    vals = {1: float(seq.g(t2))}
    for m in range(3, n + 1, 2):
        if m == 3:
            vals[3] = -delta[3] * vals[1] ** 3
            continue
        legs = {1: vals[1]}
        for i in range(3, m, 2):
            legs[i] = vals[i] * float(propagator(config.invariant(i)))
        vals[m] = delta[m] * float(tree_term(legs, m, lam)) / splitting_numerator(m, lam)
    return vals[n]


def splitting_at(seq: GreenSequence, n: int, config: MomentumConfig | None = None):
    """``delta_n = num_n H^{n+1} / C^{n+1}`` with the tree term of ``seq`` itself."""
    if n < 3 or n % 2 == 0 or n > seq.n_max:
        raise ValueError(f"order must be odd in [3, {seq.n_max}], got {n}")
    legs = leg_factors(seq, n)
    c = tree_term(legs, n, seq.lam)
    if np.any(c == 0):
        raise ZeroDivisionError(f"tree term of order {n} vanishes")
    out = splitting_numerator(n, seq.lam) * seq.value(n) / c
    if config is None:
        return out
    if config.scale not in seq.scales:
        raise ValueError("configuration scale not on the sequence grid")
    return float(out[seq.scales.index(config.scale)])

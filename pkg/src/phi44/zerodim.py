"""Zero-dimensional mapping and its fixed-point iteration.

All momenta vanish and the loop operations reduce to multiplication by one,
so a sequence is just the numbers ``H^{n+1}`` for odd ``n``. The solution
splitting values double as an oracle for the combinatorial weights used in
four dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .combinatorics import pair_partitions, triple_partitions
from .splitting import (
    ZERO_DIM,
    default_d0,
    delta_bounds,
    delta_infinity,
    gamma_max,
    renorm_bound_constants,
)

__all__ = [
    "ClosureRule",
    "TruncationError",
    "ZeroDimDiagnostics",
    "ZeroDimSequence",
    "apply_m0",
    "distance_0d",
    "extract_splitting",
    "factorized_splitting",
    "free_solution",
    "global_terms",
    "norm_weights_0d",
    "solve_zerodim",
]

UNDERFLOW = 1e-300


class ClosureRule(str, Enum):
    """How the top orders get the ``H^{n+3}`` they need beyond ``n_max``."""

    TREE = "tree"
    ASYMPTOTIC = "asymptotic"


class TruncationError(ArithmeticError):
    """A Green's function value underflowed: ``n_max`` too high for this coupling."""


@dataclass(frozen=True)
class ZeroDimSequence:
    lam: float
    n_max: int
    h: tuple

    def __post_init__(self):
        if self.n_max < 3 or self.n_max % 2 == 0:
            raise ValueError(f"n_max must be odd and >= 3, got {self.n_max}")
        if len(self.h) != (self.n_max + 1) // 2:
            raise ValueError("h must hold one value per odd order up to n_max")

    @property
    def orders(self):
        return range(1, self.n_max + 1, 2)

    def value(self, n: int) -> float:
        """``H^{n+1}``; orders above ``n_max`` read as zero."""
        if n > self.n_max:
            return 0.0
        return self.h[(n - 1) // 2]

    @property
    def deltas(self) -> dict:
        return extract_splitting(self)

    def signs_alternate(self) -> bool:
        for n in self.orders:
            v = self.value(n)
            if v != 0.0 and (v > 0) != (((n - 1) // 2) % 2 == 0):
                return False
        return self.value(1) > 0


def free_solution(lam: float, n_max: int) -> ZeroDimSequence:
    h = [0.0] * ((n_max + 1) // 2)
    h[0] = 1.0
    return ZeroDimSequence(lam, n_max, tuple(h))


def _tree_sum(value, n):
    return sum(float(p.weight) * value(p.parts[0]) * value(p.parts[1]) * value(p.parts[2])
               for p in triple_partitions(n))


def _c_term(value, n, lam):
    return -6.0 * lam * _tree_sum(value, n)


def _b_term(value, n, lam):
    return -3.0 * lam * sum(float(p.weight) * value(p.parts[1] + 1) * value(p.parts[0])
                            for p in pair_partitions(n))


def _closure_value(state, lam, d0):
    # tree extrapolation of H^{N+1}, N = n_max + 2, at the largest splitting value
    top = state.n_max + 2
    consts = renorm_bound_constants(lam, ZERO_DIM)
    d_max = delta_bounds(top, lam, consts, d0)[1]
    return d_max * _c_term(state.value, top, lam) / (3.0 * lam * top * (top - 1))


def global_terms(state: ZeroDimSequence, n: int, closure: ClosureRule = ClosureRule.TREE,
                 d0: float | None = None) -> tuple[float, float, float]:
    """``(A, B, C)`` of order ``n`` evaluated on ``state``."""
    lam = state.lam
    d0 = default_d0(lam) if d0 is None else d0
    value = state.value
    if n + 2 > state.n_max and ClosureRule(closure) is ClosureRule.TREE and lam > 0:
        upper = _closure_value(state, lam, d0)

        def value(m, _v=state.value):
            return upper if m == state.n_max + 2 else _v(m)
    a = -lam * value(n + 2)
    return a, _b_term(value, n, lam), _c_term(value, n, lam)


def _d_ratio(state, n, closure, d0):
    lam = state.lam
    if n == state.n_max and n >= 5 and ClosureRule(closure) is ClosureRule.ASYMPTOTIC:
        # smallest D_n allowed by the envelope; tends to 3 lam n(n-1)/delta_inf
        consts = renorm_bound_constants(lam, ZERO_DIM)
        return (consts.rho0 + lam * abs(consts.a0)
                + 3.0 * lam * n * (n - 1) / delta_infinity(lam, d0))
    h = state.value(n)
    if h == 0.0:
        # limit of |B|/|H|: only the pair with the tree leg H^2 survives
        return 3.0 * lam * n * state.value(1)
    if abs(h) < UNDERFLOW:
        raise TruncationError(f"|H^{n + 1}| = {abs(h):.3g} underflowed")
    a, b, _ = global_terms(state, n, closure, d0)
    return (abs(b) - abs(a)) / abs(h)


def apply_m0(state: ZeroDimSequence, closure: ClosureRule = ClosureRule.TREE,
             d0: float | None = None) -> ZeroDimSequence:
    """One application of the zero-dimensional mapping.

    The ratios ``D_n`` come from the input; the tree term of each order is
    rebuilt from the already updated lower orders.
    """
    if state.n_max < 5:
        raise ValueError("apply_m0 needs n_max >= 5")
    lam = state.lam
    if lam == 0.0:
        return free_solution(0.0, state.n_max)
    d0 = default_d0(lam) if d0 is None else d0
    new = {1: 1.0 - lam * state.value(3)}
    d3 = 6.0 * lam / (1.0 + _d_ratio(state, 3, closure, d0))
    new[3] = -d3 * new[1] ** 3
    for n in range(5, state.n_max + 1, 2):
        dn = 3.0 * lam * n * (n - 1) / (1.0 + _d_ratio(state, n, closure, d0))
        new[n] = dn * _c_term(new.__getitem__, n, lam) / (3.0 * lam * n * (n - 1))
    return ZeroDimSequence(lam, state.n_max, tuple(new[n] for n in state.orders))


def extract_splitting(state: ZeroDimSequence) -> dict:
    """Splitting values from the zero-momentum law ``H^{n+1} = -n(n-1) d_n H^{n-1} (H^2)^2``."""
    h2 = state.value(1)
    out = {}
    for n in range(3, state.n_max + 1, 2):
        if n == 3:
            den = h2 ** 3
            num = -state.value(3)
        else:
            den = n * (n - 1) * state.value(n - 2) * h2 ** 2
            num = -state.value(n)
        if den == 0.0:
            raise ZeroDivisionError(f"splitting of order {n} undefined: lower order vanishes")
        if num == 0.0:
            raise ZeroDivisionError(f"splitting of order {n} undefined: H^{n + 1} vanishes")
        out[n] = num / den
    return out


def factorized_splitting(state: ZeroDimSequence) -> dict:
    """Splitting values ``num_n H^{n+1} / C^{n+1}`` with the tree term of the state."""
    lam = state.lam
    out = {}
    for n in range(3, state.n_max + 1, 2):
        c = _c_term(state.value, n, lam)
        if c == 0.0:
            raise ZeroDivisionError(f"tree term of order {n} vanishes")
        num = 6.0 * lam if n == 3 else 3.0 * lam * n * (n - 1)
        out[n] = num * state.value(n) / c
    return out


def norm_weights_0d(lam: float, n_max: int, d0: float | None = None) -> dict:
    """Zero-momentum values of the norm weights ``M_n``."""
    d0 = default_d0(lam) if d0 is None else d0
    m1 = 7.0 * gamma_max(lam)
    w = {1: m1, 3: 6.0 * lam * m1 ** 3}
    if lam > 0:
        consts = renorm_bound_constants(lam, ZERO_DIM)
        for n in range(5, n_max + 1, 2):
            w[n] = n * (n - 1) * delta_bounds(n, lam, consts, d0)[1] * w[n - 2] * m1 ** 2
    else:
        w.update({n: 0.0 for n in range(5, n_max + 1, 2)})
    return w


def distance_0d(a: ZeroDimSequence, b: ZeroDimSequence, weights: dict) -> float:
    out = 0.0
    for n in a.orders:
        diff = abs(a.value(n) - b.value(n))
        if diff == 0.0:
            continue
        out = max(out, diff / weights[n] if weights[n] > 0 else math.inf)
    return out


@dataclass
class ZeroDimDiagnostics:
    distances: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    signs_ok: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.distances)


def solve_zerodim(lam: float, n_max: int, tol: float = 1e-12, max_iter: int = 500,
                  closure: ClosureRule = ClosureRule.TREE,
                  d0: float | None = None) -> tuple[ZeroDimSequence, ZeroDimDiagnostics]:
    """Iterate :func:`apply_m0` from the free solution until the weighted step is below ``tol``.

    Raises ``ArithmeticError`` when ``max_iter`` is exhausted.
    """
    if not 0.0 <= lam <= 0.05:
        raise ValueError(f"lambda must lie in [0, 0.05], got {lam}")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    weights = norm_weights_0d(lam, n_max, d0)
    state = free_solution(lam, n_max)
    diag = ZeroDimDiagnostics()
    for _ in range(max_iter):
        new = apply_m0(state, closure, d0)
        d = distance_0d(new, state, weights)
        if diag.distances and diag.distances[-1] > 0:
            diag.ratios.append(d / diag.distances[-1])
        diag.distances.append(d)
        diag.signs_ok.append(new.signs_alternate())
        state = new
        if d < tol:
            diag.converged = True
            return state, diag
    last = diag.ratios[-1] if diag.ratios else float("nan")
    raise ArithmeticError(f"no convergence after {max_iter} steps (last ratio {last:.4g})")

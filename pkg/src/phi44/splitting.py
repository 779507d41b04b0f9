"""Closed-form envelopes for splitting sequences and renormalization constants.

All quantities use the mass unit ``m = 1``. The default ``d0`` is ``3*lam/100``
which pins the large-order limit ``delta_inf = 3*lam/d0`` at 100.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "RenormBoundConstants",
    "SplittingBounds",
    "default_d0",
    "delta_bounds",
    "delta_infinity",
    "gamma_max",
    "renorm_bound_constants",
    "splitting_bounds",
]

ZERO_DIM = "zero_dim"
FOUR_DIM = "four_dim"


def _check_lambda(lam):
    if not math.isfinite(lam) or lam < 0:
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")


def default_d0(lam: float) -> float:
    return 3.0 * lam * 1e-2


def gamma_max(lam: float) -> float:
    return 1.0 + 9.0 * lam * (1.0 + 6.0 * lam * lam)


@dataclass(frozen=True)
class RenormBoundConstants:
    """Minimal and maximal renormalization constants for one coupling.

    ``n3_at_point`` and ``dn3_at_point`` are the value and q^2-slope of the
    reference two-loop operation at ``q^2 + m^2 = 0``; in zero dimensions the
    operation is multiplication by one, so they are 1 and 0.
    """

    lam: float
    mode: str
    n3_at_point: float
    dn3_at_point: float
    gamma0: float = 1.0
    a0: float = 0.0
    rho0: float = 0.0
    gamma_max: float = 1.0
    rho_max: float = 0.0
    a_max: float = 0.0

    @property
    def delta3_min(self) -> float:
        return 6.0 * self.lam / self.gamma_max


def renorm_bound_constants(lam: float, mode: str = ZERO_DIM,
                           loop_values: dict | None = None) -> RenormBoundConstants:
    """Populate ``gamma0, a0, rho0, gamma_max, rho_max, a_max`` for ``lam``.

    In ``four_dim`` mode ``loop_values`` must provide ``n3_at_point`` and
    ``dn3_at_point`` (see :func:`phi44.loops.reference_point_values`).
    """
    _check_lambda(lam)
    if mode == ZERO_DIM:
        n3, dn3 = 1.0, 0.0
    elif mode == FOUR_DIM:
        if not loop_values or "n3_at_point" not in loop_values \
                or "dn3_at_point" not in loop_values:
            raise ValueError("four_dim mode needs loop_values with "
                             "'n3_at_point' and 'dn3_at_point'")
        n3 = float(loop_values["n3_at_point"])
        dn3 = float(loop_values["dn3_at_point"])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    gmax = gamma_max(lam)
    d3min = 6.0 * lam / gmax
    return RenormBoundConstants(
        lam=lam,
        mode=mode,
        n3_at_point=n3,
        dn3_at_point=dn3,
        gamma0=1.0,
        a0=-d3min * n3,
        rho0=lam * d3min * dn3,
        gamma_max=gmax,
        rho_max=6.0 * lam * lam * abs(dn3),
        a_max=6.0 * lam * abs(n3),
    )


def delta_bounds(n: int, lam: float, consts: RenormBoundConstants,
                 d0: float | None = None) -> tuple[float, float]:
    """Return ``(delta_min, delta_max)`` for odd order ``n >= 3``."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"order must be odd and >= 3, got {n}")
    _check_lambda(lam)
    if d0 is None:
        d0 = default_d0(lam)
    base = consts.gamma0 + consts.rho0 + lam * abs(consts.a0)
    if n == 3:
        num = 6.0 * lam
        den_max = base + 6.0 * d0
        den_min = consts.gamma_max
    else:
        num = 3.0 * lam * n * (n - 1)
        den_max = base + n * (n - 1) * d0
        den_min = consts.gamma_max + consts.rho_max + lam * abs(consts.a_max) + num
    if den_max <= 0 or den_min <= 0:
        raise ArithmeticError(f"non-positive bound denominator at n={n}, lam={lam}")
    return num / den_min, num / den_max


def delta_infinity(lam: float, d0: float) -> float:
    """Large-order limit ``3*lam/d0`` of the upper envelope."""
    if not d0 > 0:
        raise ValueError(f"d0 must be > 0, got {d0}")
    return 3.0 * lam / d0


@dataclass(frozen=True)
class SplittingBounds:
    lam: float
    d0: float
    table: dict = field(default_factory=dict)
    delta_inf: float = math.inf

    def lower(self, n):
        return self.table[n][0]

    def upper(self, n):
        return self.table[n][1]

    def contains(self, n, value, rel_slack=1e-9):
        lo, hi = self.table[n]
        return lo * (1 - rel_slack) <= value <= hi * (1 + rel_slack)


def splitting_bounds(lam: float, n_max: int, consts: RenormBoundConstants,
                     d0: float | None = None) -> SplittingBounds:
    """Tabulate the envelopes for every odd ``3 <= n <= n_max``."""
    if d0 is None:
        d0 = default_d0(lam)
    table = {n: delta_bounds(n, lam, consts, d0) for n in range(3, n_max + 1, 2)}
    inf = delta_infinity(lam, d0) if d0 > 0 else math.inf
    return SplittingBounds(lam=lam, d0=d0, table=table, delta_inf=inf)

"""The renormalized mapping on sampled four-dimensional sequences.

One step takes a sequence ``H`` to ``H'``:

* the two-point function from the two-loop operation on ``H^4``,
  ``H^2' = (q^2+m^2)(1 + delta_1' Delta)`` with
  ``delta_1' Delta = (-rho - lam ([N3 H^4] - a) Delta) / (gamma + rho)``;
* every higher order through its splitting value,
  ``delta_n' = num_n / (gamma + rho + D_n - lam a)`` with ``D_n = (|B| - |A|) / |H^{n+1}|``
  taken from the input, and ``H^{n+1}' = delta_n' C'^{n+1} / num_n`` with the
  tree term rebuilt from the already updated lower orders.

The normalized two-loop operation is ``[N3 H^4](q^2) = -delta_3(0)((q^2+m^2) + J3[g](q^2))``
with ``J3`` subtracted to second order at ``q^2 + m^2 = 0``, so ``a = 0`` and
``H^2' Delta -> 1`` there whenever ``rho = lam delta_3(0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _seqloops as sl
from ._weights import MASS2, propagator
from .combinatorics import pair_partitions
from .loops import QuadratureConfig
from .norms import gamma_value, h2_envelope
from .splitting import delta_bounds, delta_infinity, splitting_bounds
from .trees import (
    GreenSequence,
    MomentumConfig,
    RenormConstants,
    four_dim_constants,
    leg_factors,
    splitting_at,
    splitting_numerator,
    tree_term,
)
from .zerodim import ClosureRule

__all__ = [
    "GlobalTerms",
    "MappingConfig",
    "MembershipError",
    "apply_mstar",
    "check_membership",
    "d_n",
    "global_terms",
    "mapping_identity_residual",
    "membership_violations",
    "renorm_constants",
    "renorm_envelope_violations",
]


@dataclass(frozen=True)
class MappingConfig:
    """Options of the mapping.

    ``rho_sign`` is the sign of ``rho`` in the two-point numerator; ``kernels``
    is ``"loop"`` for the bubble and sunset kernels or ``"unit"`` to replace them
    by one (the zero-dimensional limit).
    """

    quad: QuadratureConfig = QuadratureConfig()
    closure: ClosureRule = ClosureRule.TREE
    rho_sign: int = -1
    kernels: str = "loop"
    slack: float = 1e-9

    def __post_init__(self):
        if self.rho_sign not in (-1, 1):
            raise ValueError("rho_sign must be -1 or +1")
        if self.kernels not in ("loop", "unit"):
            raise ValueError(f"unknown kernels {self.kernels!r}")
        object.__setattr__(self, "closure", ClosureRule(self.closure))


class MembershipError(ValueError):
    """A sequence left the admissible set (envelope, signs or splitting bounds)."""


@dataclass(frozen=True)
class GlobalTerms:
    """``A, B, C`` of one order on the sequence scales."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    a_err: np.ndarray
    b_err: np.ndarray


def _bound_constants(h: GreenSequence, cfg: QuadratureConfig):
    key = ("bound_constants", cfg)
    if key not in h.cache:
        h.cache[key] = four_dim_constants(h.lam, cfg)
    return h.cache[key]


def _kappa(which, p2s, mcfg: MappingConfig):
    """Kernel values and their quadrature errors at ``p2s``."""
    if mcfg.kernels == "unit":
        return np.ones(len(p2s)), np.zeros(len(p2s))
    func = sl.kappa2 if which == 2 else sl.kappa3
    out = np.array([func(float(p), mcfg.quad) for p in p2s])
    return out[:, 0], out[:, 1]


def _closure_order(h, mcfg, legs):
    # tree extrapolation of H^{N+1}, N = n_max + 2, at the largest splitting value
    top = h.n_max + 2
    consts = _bound_constants(h, mcfg.quad)
    d_max = delta_bounds(top, h.lam, consts, h.d0)[1]
    return d_max * tree_term(legs, top, h.lam) / splitting_numerator(top, h.lam)


def global_terms(h: GreenSequence, n: int, mcfg: MappingConfig | None = None) -> GlobalTerms:
    """Bubble-chain ``A``, bubble ``B`` and tree ``C`` terms of order ``n`` on ``h``."""
    mcfg = mcfg or MappingConfig()
    if n < 3 or n % 2 == 0 or n > h.n_max:
        raise ValueError(f"order must be odd in [3, {h.n_max}], got {n}")
    lam = h.lam
    t2 = np.asarray(h.scales, dtype=float) ** 2
    probe = MomentumConfig(1, 1.0, h.pattern)
    top = h.n_max + 2
    legs = leg_factors(h, top)
    c = tree_term(legs, n, lam)
    b = np.zeros(len(t2))
    b_err = np.zeros(len(t2))
    for p in pair_partitions(n):
        j1, j2 = p.parts
        kap, err = _kappa(2, probe.invariant(j2) * t2, mcfg)
        factor = float(p.weight) * legs[j1] * h.value(j2 + 1)
        b = b + factor * kap
        b_err = b_err + np.abs(factor) * err
    b = -3.0 * lam * b
    b_err = 3.0 * lam * b_err
    if n + 2 <= h.n_max:
        upper = h.value(n + 2)
    elif mcfg.closure is ClosureRule.TREE:
        upper = _closure_order(h, mcfg, legs)
    else:
        upper = np.zeros(len(t2))
    kap, err = _kappa(3, t2, mcfg)
    return GlobalTerms(-lam * kap * upper, b, c, lam * err * np.abs(upper), b_err)


def d_n(h: GreenSequence, n: int, mcfg: MappingConfig | None = None) -> np.ndarray:
    """``D_n = (|B| - |A|) / |H^{n+1}|`` on the scales, with the limits used at the edges."""
    mcfg = mcfg or MappingConfig()
    lam = h.lam
    if n == h.n_max and n >= 5 and mcfg.closure is ClosureRule.ASYMPTOTIC:
        consts = _bound_constants(h, mcfg.quad)
        floor = (consts.rho0 + lam * abs(consts.a0)
                 + 3.0 * lam * n * (n - 1) / delta_infinity(lam, h.d0))
        return np.full(len(h.scales), floor)
    terms = global_terms(h, n, mcfg)
    hv = h.value(n)
    t2 = np.asarray(h.scales, dtype=float) ** 2
    # zero H: only the pair carrying the tree leg H^2 survives in |B| / |H|
    probe = MomentumConfig(1, 1.0, h.pattern)
    limit = 3.0 * lam * n * h.g(t2) * _kappa(2, probe.invariant(n - 1) * t2, mcfg)[0]
    safe = np.where(hv != 0, np.abs(hv), 1.0)
    return np.where(hv != 0, (np.abs(terms.b) - np.abs(terms.a)) / safe, limit)


def _delta3_at_zero(h):
    i = int(np.argmin(np.asarray(h.scales)))
    g0 = float(h.g(h.scales[i] ** 2))
    return -float(h.h[3][i]) / g0 ** 3


def renorm_constants(h: GreenSequence, mcfg: MappingConfig | None = None) -> RenormConstants:
    """``gamma`` (from the zero-momentum four-point law), ``rho`` and ``a`` of ``h``.

    ``a`` is ``[N3 H^4]`` at the point, ``rho`` minus ``lam`` times its slope there.
    """
    mcfg = mcfg or MappingConfig()
    if sl.is_zero(h):
        return RenormConstants(0.0, 0.0, 0.0)
    d3 = _delta3_at_zero(h)
    slope = 0.0 if mcfg.kernels == "unit" else sl.j3_slope_at_point(h, mcfg.quad)
    return RenormConstants(gamma=gamma_value(h), rho=h.lam * d3 * (1.0 + slope), a=0.0)


def renorm_envelope_violations(rc: RenormConstants, h: GreenSequence,
                               mcfg: MappingConfig | None = None) -> list[str]:
    mcfg = mcfg or MappingConfig()
    bc = _bound_constants(h, mcfg.quad)
    tol = mcfg.slack
    out = []
    if not bc.gamma0 * (1 - tol) <= rc.gamma <= bc.gamma_max * (1 + tol):
        out.append(f"gamma={rc.gamma:.6g} outside [{bc.gamma0:.6g}, {bc.gamma_max:.6g}]")
    if not bc.rho0 * (1 - tol) <= rc.rho <= bc.rho_max * (1 + tol):
        out.append(f"rho={rc.rho:.6g} outside [{bc.rho0:.6g}, {bc.rho_max:.6g}]")
    if abs(rc.a) > bc.a_max + tol:
        out.append(f"|a|={abs(rc.a):.6g} above {bc.a_max:.6g}")
    return out


def _two_point(h, rc, mcfg):
    s = h.q2 + MASS2
    d3 = _delta3_at_zero(h)
    if mcfg.kernels == "unit":
        j3 = np.zeros_like(s)
    else:
        j3, _ = sl.j3(h, mcfg.quad)
    # [N3 H^4] Delta, written so that the point q^2 = -m^2 stays finite
    n3_delta = -d3 * (1.0 + j3 / s)
    gamma = 1.0
    delta1 = (mcfg.rho_sign * rc.rho - h.lam * (n3_delta - rc.a * propagator(h.q2))) / (gamma + rc.rho)
    return s * (1.0 + delta1)


def apply_mstar(h: GreenSequence, mcfg: MappingConfig | None = None,
                check: bool = True) -> GreenSequence:
    """One mapping step. ``gamma`` in the denominators is held at one.

    With ``check`` the input must belong to the admissible set, otherwise
    :class:`MembershipError` is raised.
    """
    mcfg = mcfg or MappingConfig()
    if h.n_max < 5:
        raise ValueError("the mapping needs n_max >= 5")
    if sl.is_zero(h):
        raise ZeroDivisionError("the mapping is undefined on the zero sequence")
    if check:
        check_membership(h, mcfg)
    lam = h.lam
    rc = renorm_constants(h, mcfg)
    den0 = 1.0 + rc.rho - lam * rc.a
    ds = {n: d_n(h, n, mcfg) for n in range(3, h.n_max + 1, 2)}
    new = h.with_updates(h2=_two_point(h, rc, mcfg), h={n: np.zeros(len(h.scales)) for n in ds},
                         constants=RenormConstants(1.0, rc.rho, rc.a), nu=h.nu + 1)
    t2 = np.asarray(h.scales, dtype=float) ** 2
    deltas = {3: 6.0 * lam / (den0 + ds[3])}
    new.h[3] = -deltas[3] * new.g(t2) ** 3
    for n in range(5, h.n_max + 1, 2):
        deltas[n] = splitting_numerator(n, lam) / (den0 + ds[n])
        legs = leg_factors(new, n)
        new.h[n] = deltas[n] * tree_term(legs, n, lam) / splitting_numerator(n, lam)
    new.cache["deltas"] = deltas
    new.cache["d_n"] = ds
    new.cache["gamma_reported"] = rc.gamma
    return new


def membership_violations(h: GreenSequence, mcfg: MappingConfig | None = None) -> list[str]:
    """Reasons ``h`` is outside the admissible set; empty when it belongs."""
    mcfg = mcfg or MappingConfig()
    tol = mcfg.slack
    out = []
    pos = h.nonneg
    lo, hi = h2_envelope(h.q2[pos], h.lam)
    h2 = h.h2[pos]
    if np.any(h2 < lo * (1 - tol)) or np.any(h2 > hi * (1 + tol)):
        bad = h.q2[pos][(h2 < lo * (1 - tol)) | (h2 > hi * (1 + tol))]
        out.append(f"two-point function outside its envelope at q2={bad[0]:.6g}")
    for n in range(3, h.n_max + 1, 2):
        sign = -1.0 if (n - 1) // 2 % 2 else 1.0
        if np.any(sign * h.h[n] < 0):
            out.append(f"order {n}: sign does not alternate")
    bounds = splitting_bounds(h.lam, h.n_max, _bound_constants(h, mcfg.quad), h.d0)
    for n in range(3, h.n_max + 1, 2):
        try:
            dv = splitting_at(h, n)
        except ZeroDivisionError:
            out.append(f"order {n}: splitting undefined")
            continue
        lo_n, hi_n = bounds.lower(n), bounds.upper(n)
        if np.any(dv < lo_n * (1 - tol)) or np.any(dv > hi_n * (1 + tol)):
            out.append(f"order {n}: splitting in [{dv.min():.6g}, {dv.max():.6g}] "
                       f"outside [{lo_n:.6g}, {hi_n:.6g}]")
    return out


def check_membership(h: GreenSequence, mcfg: MappingConfig | None = None) -> None:
    bad = membership_violations(h, mcfg)
    if bad:
        raise MembershipError("; ".join(bad))


def mapping_identity_residual(h: GreenSequence, mcfg: MappingConfig | None = None) -> float:
    """Largest relative residual of ``(gamma+rho) H' = C' - D H' + lam a H'`` over orders >= 5.

    Substituting the splitting form of ``A + B`` back into the mapping must
    reproduce the unsplit equation of motion order by order.
    """
    mcfg = mcfg or MappingConfig()
    new = apply_mstar(h, mcfg)
    rc = new.constants
    worst = 0.0
    for n in range(3, h.n_max + 1, 2):
        c_new = tree_term(leg_factors(new, n), n, h.lam)
        lhs = (1.0 + rc.rho) * new.h[n]
        rhs = c_new - new.cache["d_n"][n] * new.h[n] + h.lam * rc.a * new.h[n]
        if n == 3:
            # the four-point tree is the three-leg vertex itself
            rhs = -6.0 * h.lam * new.g(np.asarray(h.scales) ** 2) ** 3 \
                - new.cache["d_n"][3] * new.h[3] + h.lam * rc.a * new.h[3]
        scale = np.maximum(np.abs(lhs), np.abs(c_new))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.where(scale > 0, scale, 1.0))))
    return worst

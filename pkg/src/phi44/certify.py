"""Closed-form contraction inequalities evaluated on parameter grids.

Every check is pure arithmetic on numpy arrays and returns a
:class:`Certificate` holding the data table behind it, so the same call
feeds both the pass/fail report and the curve CSVs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._weights import M1_EXPONENT, weight_m1
from .splitting import FOUR_DIM, gamma_max, renorm_bound_constants

__all__ = [
    "Certificate",
    "CertificationBundle",
    "CertifyConfig",
    "certify_all",
    "check_fd0",
    "check_fd1",
    "constant_curves",
    "contraction_constants",
    "crossing",
    "fd0_ratio",
    "fd1_ratio",
    "k0",
    "k1_total",
    "k3_components",
    "k11",
    "k13",
    "k_gamma",
    "k_rho",
    "knu3",
    "tree_count",
]

# fixed q^2 grid used for the sup in momentum-dependent constants
DEFAULT_Q2 = np.concatenate([[0.0], np.geomspace(1e-4, 1e6, 64)])


@dataclass
class Certificate:
    """One inequality over a grid. ``passed`` iff ``worst_margin >= 0``."""

    name: str
    grid: dict
    worst_margin: float
    arg_worst: dict
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.worst_margin >= 0)

    def summary(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "worst_margin": self.worst_margin, "arg_worst": self.arg_worst,
                **self.extra}


def _odd_range(n_range):
    ns = np.asarray(list(n_range), dtype=int)
    if ns.size == 0:
        raise ValueError("empty n grid")
    if np.any(ns % 2 == 0) or np.any(ns <= 7) or np.any(ns > 200):
        raise ValueError("n grid must hold odd integers in (7, 200]")
    return np.sort(ns)


def tree_count(n):
    """Partition count ``T_n = (n-3)^2/48 + (n-3)/3 + 1`` (array friendly)."""
    n = np.asarray(n, dtype=float)
    return (n - 3) ** 2 / 48.0 + (n - 3) / 3.0 + 1.0


def fd0_ratio(n, lam, d0):
    """Ratio bounding successive B-terms; must stay >= 1.

    >>> round(float(fd0_ratio(9, 0.05, 0.15)), 10)
    1.6
    """
    n = np.asarray(n, dtype=float)
    num = (1 + 3 * lam * (n - 2) * (n - 3)) * (1 + n * (n - 1) * d0) * (n - 3) ** 2 * tree_count(n - 2)
    den = (1 + 3 * lam * n * (n - 1)) * (1 + (n - 2) * (n - 3) * d0) * (n - 5) ** 2 * tree_count(n)
    return num / den


def fd1_ratio(n, d0):
    """Ratio bounding successive A-terms; must stay <= 1.

    >>> round(float(fd1_ratio(9, 0.15)), 10)
    0.8012345679
    """
    n = np.asarray(n, dtype=float)
    num = (n + 1) * (n + 2) * (1 + n * (n - 1) * d0) * tree_count(n + 2) * (n - 2) * (n - 3)
    den = n * (n - 1) * (1 + (n + 1) * (n + 2) * d0) * tree_count(n) * n * (n - 1)
    return num / den


def check_fd0(lam, d0, n_range=range(9, 200, 2)) -> Certificate:
    """``fd0 >= 1`` and non-increasing in ``n`` at every ``(lam, d0)``."""
    ns = _odd_range(n_range)
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    d0s = np.atleast_1d(np.asarray(d0, dtype=float))
    rows, worst, arg = [], math.inf, {}
    for la in lams:
        for d in d0s:
            v = fd0_ratio(ns, la, d)
            for n, x in zip(ns, v):
                rows.append((float(la), float(d), int(n), float(x)))
            margins = [(float(np.min(v - 1.0)), "bound", int(ns[np.argmin(v)]))]
            if ns.size > 1:
                steps = -np.diff(v)
                margins.append((float(np.min(steps)), "monotone", int(ns[np.argmin(steps) + 1])))
            for m, kind, n in margins:
                if m < worst:
                    worst, arg = m, {"lambda": float(la), "d0": float(d), "n": n, "kind": kind}
    limit_gap = max(abs(r[3] - 1.0) for r in rows if r[2] == ns[-1])
    return Certificate("fd0", {"lambda": lams.tolist(), "d0": d0s.tolist(),
                               "n": [int(ns[0]), int(ns[-1])]},
                       worst, arg, ["lambda", "d0", "n", "fd0"], rows,
                       {"limit_gap": limit_gap})


def check_fd1(d0, n_range=range(9, 200, 2)) -> Certificate:
    """``fd1 <= 1`` and non-decreasing in ``n`` at every ``d0``."""
    ns = _odd_range(n_range)
    d0s = np.atleast_1d(np.asarray(d0, dtype=float))
    rows, worst, arg = [], math.inf, {}
    for d in d0s:
        v = fd1_ratio(ns, d)
        rows.extend((float(d), int(n), float(x)) for n, x in zip(ns, v))
        margins = [(float(np.min(1.0 - v)), "bound", int(ns[np.argmax(v)]))]
        if ns.size > 1:
            steps = np.diff(v)
            margins.append((float(np.min(steps)), "monotone", int(ns[np.argmin(steps) + 1])))
        for m, kind, n in margins:
            if m < worst:
                worst, arg = m, {"d0": float(d), "n": n, "kind": kind}
    limit_gap = max(abs(r[2] - 1.0) for r in rows if r[1] == ns[-1])
    return Certificate("fd1", {"d0": d0s.tolist(), "n": [int(ns[0]), int(ns[-1])]},
                       worst, arg, ["d0", "n", "fd1"], rows, {"limit_gap": limit_gap})


# --------------------------------------------------------------------------
# contraction constants


def k0(lam):
    """First-step and ball constant ``48 lam^2 (1 + 10 lam)``."""
    return 48.0 * lam ** 2 * (1.0 + 10.0 * lam)


def k1_total(lam):
    """Two-point contraction constant ``6 lam (4 + lam)``."""
    return 6.0 * lam * (4.0 + lam)


def k1_parts(lam):
    return {"K1_1": 12.0 * lam, "K1_2": 12.0 * lam, "K1_3": 6.0 * lam ** 2}


def k13(lam, variant="linear"):
    """First-step four-point constant. The printed form is ambiguous between
    ``lam (1 + 18 lam^2)`` (``linear``) and ``lam (1 + 18^2 lam^2)`` (``squared``).
    """
    if variant == "linear":
        return lam * (1.0 + 18.0 * lam ** 2)
    if variant == "squared":
        return lam * (1.0 + 324.0 * lam ** 2)
    raise ValueError(f"unknown variant {variant!r}")


def knu3(lam):
    return lam * (1.0 + 144.0 * lam ** 2 * (1.0 + 10.0 * lam))


def k11(lam, q2=DEFAULT_Q2):
    """Sup over ``q2`` of the first-step two-point constant."""
    x = (np.asarray(q2, dtype=float) + 1.0) ** M1_EXPONENT
    vals = 6.0 * lam ** 2 * x * (1.0 + 6.0 * lam ** 2 * x) / (1.0 + 6.0 * x)
    return float(np.max(vals))


def _h2max_over_m1(lam, q2):
    s = np.asarray(q2, dtype=float) + 1.0
    h2max = gamma_max(lam) * (s + 6.0 * lam ** 2 * s ** M1_EXPONENT)
    return h2max / weight_m1(q2, lam)


def _d3_tilde_min(lam):
    c = renorm_bound_constants(lam, FOUR_DIM, {"n3_at_point": 0.0, "dn3_at_point": 1.0})
    return 1.0 + c.rho0 + lam * abs(c.a0) + 0.18 * lam


def k3_components(lam, q2=DEFAULT_Q2, m3hat=None) -> dict:
    """The four pieces of the four-point contraction constant, each a sup over ``q2``.

    ``m3hat`` is the derivative norm weight at the point; by default
    ``6 lam``, its value for the normalized reference operation.
    """
    m3hat = 6.0 * lam if m3hat is None else m3hat
    r = _h2max_over_m1(lam, q2)
    dt = _d3_tilde_min(lam)
    g = gamma_max(lam)
    out = {
        "K3_A": 3.0 * k1_total(lam) / dt * float(np.max(r ** 2)),
        "K3_B1": float(np.max(r ** 3)) * (g + 2.0 * lam * m3hat) / dt ** 2,
        "K3_B2": 9.0 * lam * (1.0 + 6.0 * lam ** 2) / dt,
        "K3_B3": float(np.max(18.0 * lam * r / dt)),
    }
    out["K3"] = sum(out.values())
    return out


def k_gamma(lam, q2=DEFAULT_Q2):
    g = gamma_max(lam)
    return 3.0 * k1_total(lam) * g / float(weight_m1(0.0, lam)) ** 2 \
        + k3_components(lam, q2)["K3"] * g ** 2


def k_rho(lam, q2=DEFAULT_Q2):
    return lam * k3_components(lam, q2)["K3"]


def crossing(func, lo=1e-6, hi=1.0) -> float:
    """Smallest grid-bracketed ``lam`` where ``func(lam) = 1``; ``inf`` if none below ``hi``."""
    grid = np.linspace(lo, hi, 2001)
    vals = np.array([func(x) for x in grid]) - 1.0
    idx = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if idx.size == 0:
        return math.inf
    i = int(idx[0])
    return float(brentq(lambda x: func(x) - 1.0, grid[i], grid[i + 1], xtol=1e-14))


def _constant_table(q2):
    comps = lambda la: k3_components(la, q2)
    gated = {
        "k0": k0,
        "K1": k1_total,
        "K1_1": lambda la: k1_parts(la)["K1_1"],
        "K1_2": lambda la: k1_parts(la)["K1_2"],
        "K1_3": lambda la: k1_parts(la)["K1_3"],
        "k13_linear": lambda la: k13(la, "linear"),
        "k13_squared": lambda la: k13(la, "squared"),
        "knu3": knu3,
        "K3_A": lambda la: comps(la)["K3_A"],
        "K3_B1": lambda la: comps(la)["K3_B1"],
        "K3_B2": lambda la: comps(la)["K3_B2"],
        "K3_B3": lambda la: comps(la)["K3_B3"],
        "K3": lambda la: comps(la)["K3"],
    }
    reported = {
        "k11": lambda la: k11(la, q2),
        "K_gamma": lambda la: k_gamma(la, q2),
        "K_rho": lambda la: k_rho(la, q2),
        "k0_plus_K1": lambda la: k0(la) + k1_total(la),
    }
    return gated, reported


def contraction_constants(lam, q2=DEFAULT_Q2) -> Certificate:
    """All named constants at each ``lam`` with their crossing points.

    Constants whose validity range is stated in closed form must be below one;
    ``k11``, ``K_gamma``, ``K_rho`` and ``k0 + K1`` are reported only.
    """
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lams <= 0):
        raise ValueError("lambda must be > 0")
    gated, reported = _constant_table(q2)
    crossings = {name: crossing(f) for name, f in {**gated, **reported}.items()}
    rows, worst, arg = [], math.inf, {}
    for la in lams:
        for name, f in gated.items():
            v = float(f(la))
            rows.append((float(la), name, v, True, crossings[name]))
            if 1.0 - v < worst:
                worst, arg = 1.0 - v, {"lambda": float(la), "constant": name}
        for name, f in reported.items():
            rows.append((float(la), name, float(f(la)), False, crossings[name]))
    failed = sorted({r[1] for r in rows if r[3] and r[2] >= 1.0})
    return Certificate("contraction", {"lambda": lams.tolist()}, worst, arg,
                       ["lambda", "constant", "value", "gated", "crossing"], rows,
                       {"crossings": crossings, "failed": failed})


def constant_curves(lams=None, q2=DEFAULT_Q2):
    """Companion constants tabulated over a coupling grid."""
    lams = np.linspace(0.001, 0.15, 150) if lams is None else np.asarray(lams, dtype=float)
    rows = [(float(la), float(k0(la)), float(k13(la, "linear")), float(k13(la, "squared")),
             float(knu3(la)), k11(la, q2)) for la in lams]
    return ["lambda", "k_nu1", "k13_linear", "k13_squared", "k_nu3", "k11"], rows


@dataclass
class CertifyConfig:
    contraction_lambdas: tuple = (0.04,)
    fd0_lambdas: tuple = (0.01, 0.02, 0.03, 0.04, 0.05)
    d0_grid: tuple = tuple(np.linspace(0.02, 0.45, 10).tolist())
    n_range: tuple = tuple(range(9, 200, 2))
    curve_lambdas: tuple = tuple(np.linspace(0.001, 0.15, 150).tolist())

    def __post_init__(self):
        for name in ("contraction_lambdas", "fd0_lambdas", "d0_grid", "n_range", "curve_lambdas"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must not be empty")
        if any(d <= 0 for d in self.d0_grid):
            raise ValueError("d0 values must be > 0")


@dataclass
class CertificationBundle:
    certificates: dict
    curves: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates.values())

    def summary(self) -> dict:
        return {"passed": self.passed,
                "certificates": {k: c.summary() for k, c in self.certificates.items()}}


def certify_all(config: CertifyConfig | None = None) -> CertificationBundle:
    config = config or CertifyConfig()
    certs = {
        "fd0": check_fd0(config.fd0_lambdas, config.d0_grid, config.n_range),
        "fd1": check_fd1(config.d0_grid, config.n_range),
        "contraction": contraction_constants(config.contraction_lambdas),
    }
    return CertificationBundle(certs, constant_curves(config.curve_lambdas))



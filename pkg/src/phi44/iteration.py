"""Fixed-point iteration of the four-dimensional mapping from the fundamental sequence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .loops import QuadratureConfig
from .mapping4d import MappingConfig, apply_mstar, membership_violations
from .norms import (
    NormWeights,
    ball_radius_r0,
    build_norm_weights,
    distance,
    distance_band,
)
from .trees import DEFAULT_SCALES, GreenSequence, build_fundamental

__all__ = ["IterationReport", "fixed_point_residual", "phi44_iterate"]


@dataclass
class IterationReport:
    """Diagnostics of one run.

    ``distances[k]`` is the step ``|H_{k+1} - H_k|``, ``ball[k]`` the distance
    of ``H_{k+1}`` from the start, ``ratios[k]`` the quotient of consecutive
    steps (empty for the first). ``status`` is ``"converged"``, ``"max_steps"``,
    ``"ball_exit"`` or ``"membership"``.
    """

    lam: float
    n_max: int
    tol: float
    r0: float
    distances: list = field(default_factory=list)
    ball: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    bands: list = field(default_factory=list)
    status: str = "max_steps"
    message: str = ""
    final: GreenSequence | None = field(default=None, repr=False)
    start: GreenSequence | None = field(default=None, repr=False)
    weights: NormWeights | None = field(default=None, repr=False)

    @property
    def nu(self) -> int:
        return len(self.distances)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def rows(self):
        """``(nu, d_nu, b_nu, ratio_nu, band_nu)``; the first ratio is NaN."""
        ratios = [math.nan] + self.ratios
        return [(k + 1, self.distances[k], self.ball[k], ratios[k], self.bands[k])
                for k in range(self.nu)]

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "n_max": self.n_max, "tol": self.tol, "r0": self.r0,
                "nu": self.nu, "status": self.status, "message": self.message,
                "converged": self.converged, "distances": self.distances,
                "ball_distances": self.ball, "ratios": self.ratios, "bands": self.bands}


def phi44_iterate(lam: float, nu_max: int = 20, tol: float = 1e-5, n_max: int = 7,
                  cfg: QuadratureConfig | None = None, mcfg: MappingConfig | None = None,
                  scales=DEFAULT_SCALES, pattern: str = "isotropic", q2=None,
                  d0: float | None = None, radius: float | None = None) -> IterationReport:
    """Apply the mapping repeatedly from the fundamental sequence.

    Stops when a step plus its quadrature band is below ``tol``, after
    ``nu_max`` steps, or as soon as an iterate leaves the ball of radius
    ``r(0)`` (or ``radius`` when given) or the admissible set.
    """
    if not 0.0 < lam <= 0.05:
        raise ValueError(f"lambda must lie in (0, 0.05], got {lam}")
    if nu_max < 1:
        raise ValueError("nu_max must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    cfg = cfg or QuadratureConfig()
    mcfg = mcfg or MappingConfig(quad=cfg)
    start = build_fundamental(lam, cfg, n_max=n_max, scales=scales, pattern=pattern,
                              d0=d0, q2=q2)
    w = build_norm_weights(lam, start.q2, start.scales, pattern, n_max, cfg, start.d0)
    r0 = ball_radius_r0(lam, w, start.d0)["r0"] if radius is None else float(radius)
    rep = IterationReport(lam, n_max, tol, r0, start=start, weights=w, final=start)
    h = start
    for _ in range(nu_max):
        new = apply_mstar(h, mcfg, check=False)
        d = distance(new, h, w)
        band = distance_band(new, h, w, d)
        if rep.distances and rep.distances[-1] > 0:
            rep.ratios.append(d / rep.distances[-1])
        rep.distances.append(d)
        rep.bands.append(band)
        rep.ball.append(distance(new, start, w))
        rep.final = new
        if rep.ball[-1] > r0:
            rep.status = "ball_exit"
            rep.message = f"step {new.nu}: distance {rep.ball[-1]:.6g} from start exceeds r0={r0:.6g}"
            return rep
        bad = membership_violations(new, mcfg)
        if bad:
            rep.status = "membership"
            rep.message = f"step {new.nu}: " + "; ".join(bad)
            return rep
        h = new
        if d + band < tol:
            rep.status = "converged"
            return rep
    return rep


def fixed_point_residual(h: GreenSequence, w: NormWeights,
                         mcfg: MappingConfig | None = None) -> float:
    """``|M(h) - h|`` in the weighted norm; raises :class:`MembershipError` off the admissible set."""
    return distance(apply_mstar(h, mcfg), h, w)

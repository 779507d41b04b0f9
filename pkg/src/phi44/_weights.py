"""Radial weight functions shared by the loop engine and the norm."""

from __future__ import annotations

import math

import numpy as np

from .splitting import gamma_max

MASS2 = 1.0
# exponent of the slowly growing factor in the norm weight M1
M1_EXPONENT = math.pi ** 2 / 54.0


def propagator(k2, m2=MASS2):
    return 1.0 / (np.asarray(k2, dtype=float) + m2)


def weight_m1(q2, lam):
    """``gamma_max * (q^2+1) * (1 + 6 (q^2+1)^(pi^2/54))``."""
    s = np.asarray(q2, dtype=float) + MASS2
    return gamma_max(lam) * s * (1.0 + 6.0 * s ** M1_EXPONENT)

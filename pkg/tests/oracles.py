"""Independent Monte Carlo estimates of four-dimensional Euclidean loop integrals.

Radial importance sampling with ``k^2 ~ BetaPrime(2, 1/2)`` (tails like ``Delta^{5/2}``)
and uniform directions on the 3-sphere. Integrals carry the ``d^4k / (2 pi)^4`` measure.
"""

import math

import numpy as np
from scipy import stats

MEASURE = 1.0 / (2.0 * math.pi) ** 4
SAMPLES = 400_000
SEED = 12345


def propagator(x):
    return 1.0 / (x + 1.0)


def draw(rng, n=SAMPLES):
    """Momenta ``k`` (n x 4), their squares and the importance weights."""
    proposal = stats.betaprime(2, 0.5)
    x = proposal.rvs(size=n, random_state=rng)
    d = rng.normal(size=(n, 4))
    d /= np.linalg.norm(d, axis=1)[:, None]
    wt = math.pi ** 2 * x / proposal.pdf(x) * MEASURE
    return np.sqrt(x)[:, None] * d, x, wt


def reference_integrals(seed=SEED, n=SAMPLES):
    """MC values of three reference integrals at ``m = 1``.

    ``cubed``: ``int Delta(k)^3``; ``bubble``: ``int Delta(k)^2 Delta(k+q)``;
    ``sunset``: ``int Delta(k1)^2 Delta(k2)^2 Delta(k1+k2+q)``, all with ``q^2 = 1``.
    Each entry is ``(mean, standard error)``.
    """
    rng = np.random.default_rng(seed)
    k1, x1, w1 = draw(rng, n)
    k2, x2, w2 = draw(rng, n)
    q = np.array([1.0, 0.0, 0.0, 0.0])
    samples = {
        "cubed": w1 * propagator(x1) ** 3,
        "bubble": w1 * propagator(x1) ** 2 * propagator(((k1 + q) ** 2).sum(1)),
        "sunset": w1 * w2 * propagator(x1) ** 2 * propagator(x2) ** 2
        * propagator(((k1 + k2 + q) ** 2).sum(1)),
    }
    return {k: (float(v.mean()), float(v.std() / math.sqrt(n))) for k, v in samples.items()}


def engine_integrals():
    """The same three integrals from the quadrature engine, unsubtracted."""
    from phi44.loops import one_loop, radial_weight, two_loop

    unit = radial_weight("unit")
    return {
        "cubed": one_loop(0.0, unit, degree=None).value,
        "bubble": one_loop(1.0, unit, degree=None).value,
        "sunset": two_loop(1.0, unit, degree=None).value,
    }

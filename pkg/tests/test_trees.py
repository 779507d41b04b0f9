import math

import numpy as np
import pytest

from phi44.splitting import delta_bounds
from phi44.trees import (
    DEFAULT_SCALES,
    GreenSequence,
    MomentumConfig,
    build_fundamental,
    eval_tree,
    leg_factors,
    splitting_at,
    standard_q2_grid,
)


@pytest.fixture(scope="module")
def fund9():
    return build_fundamental(0.04, n_max=9)


def test_grid_layout():
    q2 = standard_q2_grid()
    assert len(q2) == 64 + 4
    assert q2[0] == pytest.approx(-1 + 1e-6) and q2[-1] == pytest.approx(1e6)
    assert np.all(np.diff(q2) > 0)


def test_near_point_limit(fundamental_04):
    s = fundamental_04
    near = s.q2 < 0
    g = s.h2[near] / (s.q2[near] + 1.0)
    assert np.all(np.abs(g - 1.0) < 1e-3)
    assert float(s.g(-1.0 + 1e-6)) == pytest.approx(1.0, abs=1e-3)


def test_four_point_factorization(fundamental_04):
    s = fundamental_04
    t2 = np.asarray(s.scales) ** 2
    expected = -s.deltas[3] * s.g(t2) ** 3
    assert np.allclose(s.h[3], expected, rtol=1e-12, atol=0)
    at_zero = -s.deltas[3][0] * float(s.h2_at(0.0) * 1.0) ** 3
    assert s.h[3][0] == pytest.approx(at_zero, rel=1e-12)


def test_six_point_hand_expansion(fundamental_04):
    # one triple (1, 1, 3) with weight 10 against the numerator 60 lam
    s = fundamental_04
    g0 = float(s.g(0.0))
    expected = -s.deltas[5][0] * g0 ** 2 * s.h[3][0]
    assert s.h[5][0] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_splitting_recovers_minimal_values(fund9, n):
    lo = fund9.cache["bounds"].lower(n)
    assert np.allclose(splitting_at(fund9, n), lo, rtol=1e-12, atol=0)
    assert splitting_at(fund9, n, MomentumConfig(n, 3.0)) == pytest.approx(lo, rel=1e-12)


def test_minimal_values_match_bounds(fundamental_04):
    s = fundamental_04
    consts = s.cache["bound_constants"]
    for n in range(3, s.n_max + 1, 2):
        assert s.deltas[n][0] == delta_bounds(n, s.lam, consts, s.d0)[0]


def test_signs_alternate(fund9):
    for n in range(3, 10, 2):
        assert np.all(np.sign(fund9.h[n]) == (-1) ** ((n - 1) // 2))
    assert np.all(fund9.h2[fund9.nonneg] > 0)


def test_two_point_envelope(fundamental_04):
    s = fundamental_04
    pos = s.q2 >= 1e-4
    sq = s.q2[pos] + 1.0
    assert np.all(s.h2[pos] <= sq ** (1 + math.pi ** 2 / 18))
    # at q2 = 0 the envelope is touched up to quadrature noise
    assert float(s.h2_at(0.0)) <= 1.0 + 1e-8


@pytest.mark.parametrize("n", [5, 7, 9])
def test_large_scale_decay(fund9, n):
    t = np.asarray(fund9.scales)[-3:]
    v = np.abs(fund9.h[n][-3:])
    assert np.all(np.diff(np.abs(fund9.h[n][3:])) < 0)
    slope = np.polyfit(np.log(t), np.log(v), 1)[0]
    assert slope <= -(n - 3) + 0.5


def test_off_grid_evaluation_is_consistent(fund9):
    for n in (3, 5, 7):
        on = eval_tree(fund9, n, MomentumConfig(n, 3.0))
        assert on == pytest.approx(fund9.h[n][DEFAULT_SCALES.index(3.0)], rel=1e-12)
        near = eval_tree(fund9, n, MomentumConfig(n, 3.0 + 1e-9))
        assert near == pytest.approx(on, rel=1e-6)


def test_eval_tree_guards(fund9):
    with pytest.raises(ValueError):
        eval_tree(fund9, 11)
    with pytest.raises(ValueError):
        eval_tree(fund9, 5, MomentumConfig(7, 1.0))
    with pytest.raises(ValueError):
        MomentumConfig(4, 1.0)
    with pytest.raises(ValueError):
        MomentumConfig(3, -1.0)


def test_collinear_pattern_invariants():
    c = MomentumConfig(5, 2.0, "collinear")
    assert c.invariant(3) == pytest.approx(36.0)
    assert MomentumConfig(5, 0.0).invariant(3) == 0.0


def test_vanishing_tree_term_is_rejected(fundamental_04):
    s = fundamental_04
    zero = GreenSequence(s.lam, 5, s.q2, np.zeros_like(s.h2), {3: np.ones(len(s.scales)),
                                                                5: np.ones(len(s.scales))},
                         s.scales)
    with pytest.raises(ZeroDivisionError):
        splitting_at(zero, 3)


def test_leg_factors_use_propagators(fundamental_04):
    s = fundamental_04
    legs = leg_factors(s, 7)
    t2 = np.asarray(s.scales) ** 2
    assert np.allclose(legs[3], s.h[3] / (3 * t2 + 1))


def test_rejects_bad_coupling():
    with pytest.raises(ValueError):
        build_fundamental(0.0)
    with pytest.raises(ValueError):
        build_fundamental(0.06)

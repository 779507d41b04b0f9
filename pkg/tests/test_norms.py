import math

import numpy as np
import pytest

from phi44.norms import (
    FAMILIES,
    ball_radius_r0,
    banach_norm,
    build_norm_weights,
    distance,
    distance_band,
    distance_entries,
    envelope_exponent,
    h2_envelope,
    norm_entries,
    relative_quadrature_error,
    weight_m1,
)
from phi44.splitting import gamma_max
from phi44.trees import MomentumConfig, build_fundamental, standard_q2_grid


def test_m1_reference_value():
    assert float(weight_m1(0.0, 0.05)) == pytest.approx(10.19725, abs=1e-12)
    assert float(weight_m1(0.0, 0.05)) == pytest.approx(gamma_max(0.05) * 7, rel=1e-15)


@pytest.mark.parametrize("lam", [0.01, 0.04, 0.05])
def test_m1_dominates_two_point_envelope(lam):
    q2 = standard_q2_grid()
    q2 = q2[q2 >= 0]
    _, hi = h2_envelope(q2, lam)
    assert np.all(weight_m1(q2, lam) > hi)


def test_envelope_ratio_at_large_momentum():
    lam = 0.05
    _, hi = h2_envelope(1e6, lam)
    ratio = float(hi / weight_m1(1e6, lam))
    assert abs(ratio / (6 * lam ** 2) - 1) < 0.2


def test_envelope_exponent_sequence():
    assert envelope_exponent(1) == pytest.approx(1 / 3)
    assert envelope_exponent(4) < envelope_exponent(5) < envelope_exponent(2000)
    assert envelope_exponent(2000) == pytest.approx(math.pi ** 2 / 18, rel=1e-3)
    assert envelope_exponent(None) == pytest.approx(math.pi ** 2 / 54)


def test_weights_positive_and_recursive(weights_04):
    w = weights_04
    assert np.all(w.m1 > 0) and w.n_gamma > 0 and np.all(w.m_hat3 > 0)
    for n in w.m_n:
        assert np.all(w.m_n[n] > 0) and np.all(w.m_hat_n2[n] > 0)
    t2 = np.asarray(w.scales) ** 2
    m1d = weight_m1(t2, w.lam) / (t2 + 1)
    bounds = build_fundamental(w.lam).cache["bounds"]
    probe = MomentumConfig(1, 1.0, w.pattern)
    for n in range(5, w.n_max + 1, 2):
        expect = (n * (n - 1) * bounds.upper(n) * w.m_n[n - 2]
                  / (probe.invariant(n - 2) * t2 + 1) * m1d ** 2)
        assert np.allclose(w.m_n[n], expect, rtol=1e-12, atol=0)


def test_weights_need_positive_coupling():
    with pytest.raises(ValueError):
        build_norm_weights(0.0, [0.0, 1.0], (0.0, 1.0))


def test_zero_sequence_has_zero_norm(fundamental_04, weights_04):
    s = fundamental_04
    zero = s.with_updates(h2=np.zeros_like(s.h2), h={n: np.zeros_like(v) for n, v in s.h.items()})
    assert banach_norm(zero, weights_04) == 0.0


def test_fundamental_norm_is_bounded(fundamental_04, weights_04):
    entries = norm_entries(fundamental_04, weights_04)
    assert set(entries) == set(FAMILIES)
    assert 0 < banach_norm(fundamental_04, weights_04) <= 1.0


def test_tree_family_is_homogeneous(fundamental_04, weights_04):
    s = fundamental_04
    doubled = s.with_updates(h2=2 * s.h2, h={n: 2 * v for n, v in s.h.items()})
    a = norm_entries(s, weights_04)["tree"]
    b = norm_entries(doubled, weights_04)["tree"]
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_ball_radius_components(weights_04):
    r = ball_radius_r0(0.04, weights_04)
    assert 0 < r["splitting"] < 1
    assert r["r0"] == max(r["splitting"], r["two_point"], r["n3_slope"])
    assert r["r0"] == pytest.approx(0.8351, abs=5e-4)


def test_splitting_gap_vanishes_at_small_coupling():
    lam = 1e-6
    s = build_fundamental(lam, q2=[0.0, 1.0, 10.0], scales=(0.0, 1.0))
    w = build_norm_weights(lam, s.q2, s.scales)
    assert ball_radius_r0(lam, w)["splitting"] < 1e-3


def test_distance_to_self_is_zero(fundamental_04, weights_04):
    assert distance(fundamental_04, fundamental_04, weights_04) == 0.0


def _perturbed(seq, rng, scale=0.05):
    return seq.with_updates(h={n: v * (1 + scale * rng.uniform(-1, 1, v.shape))
                               for n, v in seq.h.items()})


def test_distance_is_symmetric(fundamental_04, weights_04):
    rng = np.random.default_rng(0)
    a = _perturbed(fundamental_04, rng)
    b = _perturbed(fundamental_04, rng)
    assert distance(a, b, weights_04) == distance(b, a, weights_04)


def test_triangle_inequality_on_random_triples(fundamental_04, weights_04):
    rng = np.random.default_rng(11)
    w = weights_04
    for _ in range(100):
        a, b, c = (_perturbed(fundamental_04, rng) for _ in range(3))
        assert distance(a, c, w) <= distance(a, b, w) + distance(b, c, w) * (1 + 1e-12)


def test_triangle_inequality_with_two_point_changes(fundamental_04, weights_04):
    rng = np.random.default_rng(5)
    s = fundamental_04
    seqs = [s.with_updates(h2=s.h2 * (1 + 1e-3 * rng.uniform(-1, 1) * np.tanh(s.q2 + 1)))
            for _ in range(3)]
    a, b, c = seqs
    w = weights_04
    assert distance(a, c, w) <= distance(a, b, w) + distance(b, c, w) * (1 + 1e-12)


def test_grid_mismatch_is_rejected(fundamental_04, weights_04):
    s = fundamental_04
    other = build_fundamental(0.04, n_max=5)
    with pytest.raises(ValueError):
        distance(s, other, weights_04)
    shifted = s.with_updates(scales=tuple(x * 1.5 for x in s.scales))
    with pytest.raises(ValueError):
        banach_norm(shifted, weights_04)


def test_band_scales_with_distance(fundamental_04, weights_04):
    rng = np.random.default_rng(2)
    a = _perturbed(fundamental_04, rng)
    d = distance(a, fundamental_04, weights_04)
    band = distance_band(a, fundamental_04, weights_04)
    rel = relative_quadrature_error(fundamental_04, weights_04)
    assert band == pytest.approx(d * rel)
    assert 0 < rel < 1e-2
    assert distance_entries(a, fundamental_04, weights_04)["tree"] > 0


def test_grid_refinement_stability(fundamental_04, weights_04):
    q2 = standard_q2_grid(128)
    fine = build_fundamental(0.04, q2=q2)
    wf = build_norm_weights(0.04, fine.q2, fine.scales)
    coarse = banach_norm(fundamental_04, weights_04)
    assert abs(banach_norm(fine, wf) - coarse) < 0.02 * coarse

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phi44.splitting import (
    default_d0,
    delta_bounds,
    delta_infinity,
    renorm_bound_constants,
)
from phi44.zerodim import (
    ClosureRule,
    TruncationError,
    ZeroDimSequence,
    apply_m0,
    distance_0d,
    extract_splitting,
    factorized_splitting,
    free_solution,
    global_terms,
    norm_weights_0d,
    solve_zerodim,
)


def test_free_solution_is_fixed_at_zero_coupling():
    s = free_solution(0.0, 9)
    assert apply_m0(s) == s
    fixed, diag = solve_zerodim(0.0, 9)
    assert fixed.h == s.h and diag.iterations == 1


def test_first_step_from_free_solution():
    new = apply_m0(free_solution(0.04, 11))
    assert new.value(1) == 1.0
    assert new.value(3) == pytest.approx(-0.24 / 1.36, rel=1e-14)
    assert extract_splitting(new)[3] == pytest.approx(0.17647, abs=1e-5)


def test_extraction_fails_on_free_solution():
    with pytest.raises(ZeroDivisionError):
        extract_splitting(free_solution(0.04, 7))


def test_sequence_validation():
    with pytest.raises(ValueError):
        ZeroDimSequence(0.01, 8, (1.0,) * 4)
    with pytest.raises(ValueError):
        ZeroDimSequence(0.01, 7, (1.0,) * 3)
    with pytest.raises(ValueError):
        apply_m0(free_solution(0.01, 3))


def test_rejects_coupling_out_of_range():
    with pytest.raises(ValueError):
        solve_zerodim(0.06, 9)
    with pytest.raises(ValueError):
        solve_zerodim(0.01, 9, tol=0.0)


def test_non_convergence_reports_last_ratio():
    with pytest.raises(ArithmeticError, match="last ratio"):
        solve_zerodim(0.04, 11, tol=1e-15, max_iter=3)


def test_underflow_is_flagged():
    h = (1.0, -0.1, 1e-310, -1e-320)
    with pytest.raises(TruncationError):
        apply_m0(ZeroDimSequence(0.01, 7, h))


@pytest.mark.parametrize("lam", [0.005, 0.01, 0.02, 0.04])
def test_converges_with_contraction_and_bounds(lam):
    fixed, diag = solve_zerodim(lam, 11, tol=1e-12)
    assert diag.converged
    assert all(r < 1 for r in diag.ratios)
    assert all(diag.signs_ok)
    consts = renorm_bound_constants(lam)
    for n, d in factorized_splitting(fixed).items():
        lo, hi = delta_bounds(n, lam, consts)
        assert lo <= d <= hi, (n, lo, d, hi)


def test_fixed_point_residual():
    tol = 1e-12
    fixed, _ = solve_zerodim(0.03, 11, tol=tol)
    w = norm_weights_0d(0.03, 11)
    assert distance_0d(apply_m0(fixed), fixed, w) < 10 * tol


def test_splitting_increases_and_stays_below_limit():
    fixed, _ = solve_zerodim(0.01, 13)
    deltas = factorized_splitting(fixed)
    values = [deltas[n] for n in sorted(deltas)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] < delta_infinity(0.01, default_d0(0.01))


def test_zero_momentum_law_extraction():
    fixed, _ = solve_zerodim(0.02, 11)
    a = extract_splitting(fixed)
    b = factorized_splitting(fixed)
    assert a[3] == pytest.approx(b[3], rel=1e-12)
    h = fixed.value
    for n in range(5, 12, 2):
        assert a[n] > 0
        assert h(n) == pytest.approx(-n * (n - 1) * a[n] * h(n - 2) * h(1) ** 2, rel=1e-14)


@pytest.mark.parametrize("closure", list(ClosureRule))
def test_truncation_insensitivity(closure):
    d9 = extract_splitting(solve_zerodim(0.04, 9, closure=closure)[0])[3]
    d13 = extract_splitting(solve_zerodim(0.04, 13, closure=closure)[0])[3]
    assert abs(d9 - d13) / d13 < 0.01


def test_closures_agree_closely():
    a = extract_splitting(solve_zerodim(0.02, 11, closure=ClosureRule.TREE)[0])
    b = extract_splitting(solve_zerodim(0.02, 11, closure=ClosureRule.ASYMPTOTIC)[0])
    assert a[3] == pytest.approx(b[3], rel=1e-3)


def test_global_terms_signs():
    fixed, _ = solve_zerodim(0.04, 11)
    for n in range(3, 12, 2):
        a, b, c = global_terms(fixed, n)
        s = (-1) ** ((n - 1) // 2)
        assert a * s > 0 and c * s > 0 and b * s < 0


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.05), st.sampled_from([7, 9, 11]),
       st.sampled_from(list(ClosureRule)))
def test_signs_alternate_along_iteration(lam, n_max, closure):
    s = free_solution(lam, n_max)
    for _ in range(50):
        s = apply_m0(s, closure)
        assert s.signs_alternate()

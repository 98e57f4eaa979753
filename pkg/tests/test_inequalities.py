import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matmean import inequalities as iq
from matmean.errors import DomainError
from matmean.linalg import mexp, mpow, random_unitary
from matmean.majorization import NormSelector, default_norms

from conftest import Pauli, np_expm_h, rand_herm

TRACE = NormSelector("trace")
seeds = st.integers(0, 2**32 - 1)


def pair(seed, n=4, sigma=0.6):
    rng = np.random.default_rng(seed)
    return rand_herm(rng, n, sigma), rand_herm(rng, n, sigma)


def commuting(seed, n=3):
    rng = np.random.default_rng(seed)
    U = random_unitary(n, rng)
    return (U * rng.standard_normal(n)) @ U.conj().T, (U * rng.standard_normal(n)) @ U.conj().T


def test_verdict_rules():
    r = iq.compare("x", 1.0, 1.0 + 5e-10)
    assert r.verdict == iq.EQUALITY and r.tol == pytest.approx(1e-9 * 1.0000000005)
    assert iq.compare("x", 1.0, 2.0).verdict == iq.HOLDS
    assert iq.compare("x", 2.0, 1.0).verdict == iq.VIOLATED
    assert iq.compare("x", 1e6, 1e6 - 1e-4).verdict == iq.EQUALITY
    assert iq.compare("x", 1e6, 1e6 - 1e-2).verdict == iq.VIOLATED
    assert iq.agree("x", 1.0, 1.0 + 1e-6).verdict == iq.VIOLATED
    assert iq.not_applicable("x").passed


def test_regimes_and_boundaries():
    assert iq.regimes(0.5) == ("interior",)
    assert iq.regimes(0.0) == ("interior", "near_exterior")
    assert iq.regimes(1.0) == ("interior", "near_exterior")
    assert iq.regimes(2.0) == ("near_exterior", "far_exterior")
    assert iq.regimes(-1.0) == ("near_exterior", "far_exterior")
    assert iq.regimes(-2.5) == ("far_exterior",)
    assert iq.regime_label(1.0) == "interior|near_exterior"
    ts = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    for regime in iq.REGIMES:
        assert list(iq.regime_mask(ts, regime)) == [regime in iq.regimes(t) for t in ts]


def test_condition_guard_bounds_exponent_range(rng):
    H, K = rand_herm(rng, 4, 3.0), rand_herm(rng, 4, 3.0)
    H2, K2, f = iq.condition_guard(H, K, 5.0, 1e8)
    assert f < 1
    total = 5.0 * (np.ptp(np.linalg.eigvalsh(H2)) + np.ptp(np.linalg.eigvalsh(K2)))
    assert total == pytest.approx(math.log(1e8), rel=1e-12)
    same = iq.condition_guard(H * 1e-3, K * 1e-3, 5.0)
    assert same[2] == 1.0


# --- Golden-Thompson ------------------------------------------------------

def test_golden_thompson_pauli():
    res = iq.golden_thompson(Pauli.H, Pauli.K)
    assert res.lhs == pytest.approx(Pauli.trace_exp_sum, rel=1e-12)
    assert res.rhs == pytest.approx(Pauli.trace_product, rel=1e-12)
    assert res.verdict == iq.HOLDS
    assert res.context["imag_residual"] <= 1e-10 * res.rhs


def test_golden_thompson_equality_cases():
    assert iq.golden_thompson(np.diag([1.0, -2.0]), np.diag([0.5, 3.0])).verdict == iq.EQUALITY
    assert iq.golden_thompson([[0.7]], [[-1.2]]).verdict == iq.EQUALITY


@given(seeds)
def test_golden_thompson_random(seed):
    H, K = pair(seed)
    assert iq.golden_thompson(H, K).verdict != iq.VIOLATED


# --- three-regime ordering -----------------------------------------------

@pytest.mark.parametrize("t", [-2.5, -1.0, -0.5, 0.0, 0.3, 1.0, 1.5, 2.0, 3.0])
def test_pauli_triple_matches_closed_forms(t):
    a, b, c = iq.norm_triple(Pauli.H, Pauli.K, t, TRACE)
    assert a == pytest.approx(Pauli.trace_mean(t), rel=1e-10)
    assert b == pytest.approx(Pauli.trace_exp(t), rel=1e-10)
    assert c == pytest.approx(Pauli.trace_sym(t), rel=1e-10)
    op = NormSelector("operator")
    a1, b1, c1 = iq.norm_triple(Pauli.H, Pauli.K, t, op)
    assert a1 == pytest.approx(Pauli.eigs_from_trace(Pauli.trace_mean(t))[0], rel=1e-10)
    assert b1 == pytest.approx(math.exp(math.hypot(1 - t, t)), rel=1e-10)
    assert c1 == pytest.approx(Pauli.eigs_from_trace(Pauli.trace_sym(t))[0], rel=1e-10)


@pytest.mark.parametrize("t", [-2.5, -1.0, -0.5, 0.0, 0.3, 1.0, 1.5, 2.0, 3.0])
def test_pauli_regime_ordering(t):
    for sel in default_norms(2):
        results = iq.three_way_compare(Pauli.H, Pauli.K, t, sel)
        assert results and all(r.passed for r in results)


def test_triple_endpoints_and_commuting():
    H, K = pair(3)
    for t, M in ((0.0, H), (1.0, K)):
        a, b, c = iq.norm_triple(H, K, t, TRACE)
        ref = np.sum(np.exp(np.linalg.eigvalsh(M)))
        for v in (a, b, c):
            assert v == pytest.approx(ref, rel=1e-10)
    Hc, Kc = commuting(4)
    for t in (-2.0, 0.4, 1.7, 2.5):
        a, b, c = iq.norm_triple(Hc, Kc, t, TRACE)
        assert a == pytest.approx(b, rel=1e-10) and c == pytest.approx(b, rel=1e-10)


def test_random_pair_near_exterior_ordering():
    H, K = pair(11)
    results = iq.three_way_compare(H, K, 1.5, TRACE)
    assert [r.context["ordering"] for r in results] == ["exp<=sym", "sym<=mean"]
    assert all(r.verdict == iq.HOLDS for r in results)


def test_theorem2_switch_path_agrees():
    H, K = pair(12)
    ts = np.arange(-3.0, 3.01, 0.25)
    batches = iq.theorem2_batches(H, K, ts, default_norms(4))
    assert not any(b.violated.any() for b in batches)
    sw = [b for b in batches if b.check_id == "theorem2_switch"]
    assert sw and all(np.all(b.verdict == iq.EQUALITY) for b in sw)


def test_literal_product_form_fails_near_exterior():
    # the non-normal product e^{(1-t)H} e^{tK} has the same trace as the
    # symmetrized form but different singular values; its trace norm can
    # exceed the mean near the exterior boundary, so the symmetrized form is used
    found = False
    for seed in range(40):
        H, K = pair(seed, 4, 1.0)
        H, K, _ = iq.condition_guard(H, K, 3.0)
        t = 1.5
        mean = float(np.sum(iq.mean_singular_values(H, K, [t])))
        literal = float(np.sum(iq.product_singular_values(H, K, [t])))
        sym = float(np.sum(iq.sym_singular_values(H, K, [t])))
        assert sym <= mean * (1 + 1e-9)
        if literal > mean * (1 + 1e-6):
            found = True
            break
    assert found


# --- interpolation ---------------------------------------------------------

def test_interior_interpolation_examples():
    Hc, Kc = commuting(5)
    assert iq.interior_interpolation(Hc, Kc, 0.5, 1.0, TRACE).verdict == iq.EQUALITY
    H, K = pair(6)
    assert iq.interior_interpolation(H, K, 0.0, 2.0, TRACE).verdict == iq.EQUALITY
    assert iq.interior_interpolation(H, K, 0.3, 0.5, NormSelector("kyfan", 2)).verdict == iq.HOLDS
    with pytest.raises(DomainError):
        iq.interior_interpolation(H, K, 1.5, 1.0, TRACE)


def test_exterior_interpolation_examples():
    H, K = pair(7)
    assert iq.exterior_interpolation(H, K, 1.0, 1.0, TRACE).verdict == iq.EQUALITY
    Hc, Kc = commuting(8)
    assert iq.exterior_interpolation(Hc, Kc, 2.0, 3.0, TRACE).verdict == iq.EQUALITY
    res = iq.exterior_interpolation(H, K, -0.5, 1.0, TRACE)
    assert res.verdict == iq.HOLDS
    near = iq.three_way_compare(H, K, -0.5, TRACE)
    # exp <= sym <= mean at t = -0.5 agrees with exp <= mean
    assert near[0].lhs == pytest.approx(res.lhs, rel=1e-12)
    assert near[1].rhs == pytest.approx(res.rhs, rel=1e-10)
    with pytest.raises(DomainError):
        iq.exterior_interpolation(H, K, 0.5, 1.0, TRACE)


@given(seeds, st.floats(-3, 3).filter(lambda t: t <= 0 or t >= 1), st.sampled_from([0.25, 0.5, 1.0, 2.0, 4.0]))
def test_exterior_switch_consistency(seed, t, r):
    H, K = pair(seed, 3, 0.4)
    H, K, _ = iq.condition_guard(H, K, iq.mean_weight([t], r))
    a = iq.exterior_interpolation(H, K, t, r, TRACE)
    b = iq.exterior_interpolation(K, H, 1 - t, r, TRACE)
    assert a.rhs == pytest.approx(b.rhs, rel=1e-9)
    assert a.passed and b.passed
    assert iq.exterior_logmaj(H, K, t, r).passed


def test_interpolation_pauli_values():
    for t in (-1.0, 0.25, 2.0):
        res = iq.theorem1_gap(Pauli.H, Pauli.K, t, 1.0, TRACE)
        mean, exp = Pauli.trace_mean(t), Pauli.trace_exp(t)
        if 0 <= t <= 1:
            assert (res.lhs, res.rhs) == pytest.approx((mean, exp), rel=1e-10)
        else:
            assert (res.lhs, res.rhs) == pytest.approx((exp, mean), rel=1e-10)
        assert res.passed


# --- Hiai bounds -------------------------------------------------------------

def test_hiai_branches():
    assert iq.hiai_branches(2.0, 1.0) == ("upper", "lower")
    assert iq.hiai_branches(3.0, 2.0) == ("upper",)
    assert iq.hiai_branches(3.0, 1.0) == ("lower",)
    assert iq.hiai_branches(1.5, 0.6) == ()


def test_hiai_examples():
    H, K = pair(13)
    both = iq.hiai2019_regime(H, K, 2.0, 1.0, TRACE)
    norm_results = [r for r in both if r.check_id == "hiai"]
    assert len(norm_results) == 2
    assert norm_results[0].lhs == pytest.approx(norm_results[0].rhs, rel=1e-8)
    assert all(r.passed for r in both)
    # unguarded, e^{rH} at r = 2, t = 3 is conditioned badly enough to spoil the total slack
    Hg, Kg, _ = iq.condition_guard(H, K, iq.mean_weight([3.0], 2.0))
    assert all(r.passed for r in iq.hiai2019_regime(Hg, Kg, 3.0, 2.0, TRACE))
    Hc, Kc = commuting(14)
    assert all(r.verdict == iq.EQUALITY for r in iq.hiai2019_regime(Hc, Kc, 3.0, 2.0, TRACE))
    dead = iq.hiai2019_regime(H, K, 1.5, 0.6, TRACE)
    assert [r.verdict for r in dead] == [iq.NOT_APPLICABLE]


def test_hiai_pauli_boundary_equality():
    # at t = 2, r = 1 the mean and the symmetrized product have equal traces
    assert Pauli.trace_mean(2.0) == pytest.approx(Pauli.trace_sym(2.0), rel=1e-14)
    res = [r for r in iq.hiai2019_regime(Pauli.H, Pauli.K, 2.0, 1.0, TRACE) if r.check_id == "hiai"]
    assert all(r.verdict == iq.EQUALITY for r in res)


# --- Araki and Golden-Thompson log forms -----------------------------------

def test_araki_examples():
    A = np_expm_h(rand_herm(np.random.default_rng(1), 3))
    B = np_expm_h(rand_herm(np.random.default_rng(2), 3))
    v1 = iq.araki_check(A, B, 1.0)
    assert v1.relation == "log" and abs(v1.worst_margin) <= 1e-12
    assert iq.araki_check(A, B, 2.0).relation == "log"
    Hc, Kc = commuting(3)
    v = iq.araki_check(np_expm_h(Hc), np_expm_h(Kc), 3.0)
    assert v.relation == "log" and np.max(np.abs(v.prefix_margins)) <= 1e-10
    with pytest.raises(DomainError):
        iq.araki_check(A, B, 0.5)


def test_araki_against_brute_force(rng):
    # direct singular values from numpy for both sides, r = 2
    A = np_expm_h(rand_herm(rng, 3))
    B = np_expm_h(rand_herm(rng, 3))
    w, U = np.linalg.eigh(A)
    root = (U * np.sqrt(w)) @ U.conj().T
    left = np.linalg.svd(np.linalg.matrix_power(root @ B @ root, 2), compute_uv=False)
    right = np.linalg.svd(A @ B @ B @ A, compute_uv=False)
    ref = np.cumsum(np.log(right)) - np.cumsum(np.log(left))
    v = iq.araki_check(A, B, 2.0)
    np.testing.assert_allclose(v.prefix_margins, ref, atol=1e-9)


def test_gt_logmaj_examples():
    Hc, Kc = commuting(15)
    for q in (0.25, 1.0, 4.0):
        v = iq.gt_logmaj(Hc, Kc, q)
        assert v.relation == "log" and np.max(np.abs(v.prefix_margins)) <= 1e-9
    H, K = pair(16)
    for q in (0.25, 0.5, 1.0, 2.0, 4.0):
        assert iq.gt_logmaj(H, K, q).relation == "log"
    mono = iq.kyfan_monotonicity(H, K, (0.25, 0.5, 1.0, 2.0, 4.0))
    assert [r.context["k"] for r in mono] == [1, 2, 3, 4]
    assert all(r.passed for r in mono)
    assert mono[0].passed and mono[-1].context["strict"]


def test_gt_logmaj_small_q_limit():
    H, K = pair(17)
    value = float(np.sum(iq._sandwich_power_eigs(H, K, 1e-3)))
    target = float(np.sum(np.exp(np.linalg.eigvalsh(H + K))))
    assert value == pytest.approx(target, rel=1e-4)


# --- near-exterior log-majorization, compounds, Furuta ------------------------------------------

def test_theorem5_examples():
    H, K = pair(18)
    v = iq.theorem5_check(H, K, 1.0)
    assert v.relation == "log" and np.max(np.abs(v.prefix_margins)) <= 1e-10
    v2 = iq.theorem5_check(H, K, 2.0)
    assert v2.relation == "log" and np.max(np.abs(v2.prefix_margins)) <= 1e-8
    assert iq.theorem5_check(H, K, 1.5).relation == "log"
    cross = iq.theorem5_compound_crosscheck(H, K, 1.5)
    assert cross.verdict == iq.EQUALITY and cross.context["compound_relation"] == "log"
    with pytest.raises(DomainError):
        iq.theorem5_check(H, K, 2.5)


def test_theorem5_pauli_t2_equal_singular_values():
    m = iq.mean_singular_values(Pauli.H, Pauli.K, [2.0])[0]
    s = iq.sym_singular_values(Pauli.H, Pauli.K, [2.0])[0]
    np.testing.assert_allclose(m, s, rtol=1e-12)
    np.testing.assert_allclose(s, Pauli.eigs_from_trace(Pauli.trace_sym(2.0)), rtol=1e-12)


def test_furuta_examples():
    A = np_expm_h(rand_herm(np.random.default_rng(19), 3))
    res = iq.furuta_check(A, A, 0.5, 2.0, 2.0)
    assert res.verdict == iq.EQUALITY
    for a, b, r, p, q in ((3.0, 2.0, 0.5, 2.0, 2.0), (5.0, 0.1, 1.0, 3.0, 2.0)):
        res = iq.furuta_check([[a]], [[b]], r, p, q)
        assert res.passed
        assert res.lhs == pytest.approx((a**r * b**p * a**r) ** (1 / q), rel=1e-12)
        assert res.rhs == pytest.approx(a ** ((p + 2 * r) / q), rel=1e-12)
    rng = np.random.default_rng(20)
    B = np_expm_h(rand_herm(rng, 4))
    G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    A = B + G @ G.conj().T / 4
    assert iq.furuta_check(A, B, 0.5, 2.0, 2.0).verdict == iq.HOLDS


def test_furuta_hypotheses_give_not_applicable():
    A = np.diag([2.0, 1.0])
    assert iq.furuta_check(A, A, 0.5, 5.0, 1.0).verdict == iq.NOT_APPLICABLE   # (1+2r)q < p+2r
    assert iq.furuta_check(A, A, 0.5, 1.0, 0.5).verdict == iq.NOT_APPLICABLE   # q < 1
    assert iq.furuta_check(np.eye(2), A, 0.5, 1.0, 1.0).verdict == iq.NOT_APPLICABLE  # A not >= B


def test_furuta_instance_satisfies_hypotheses():
    H, K = pair(21)
    for t in (1.25, 1.5, 2.0):
        A, B, r, p, q = iq.furuta_instance(H, K, t)
        assert (r, p, q) == (0.5, 1 / (t - 1), 1 / (t - 1))
        assert np.min(np.linalg.eigvalsh(A - B)) >= -1e-10 * np.max(np.linalg.eigvalsh(A))
        assert iq.furuta_check(A, B, r, p, q).passed
    with pytest.raises(DomainError):
        iq.furuta_instance(H, K, 1.0)


# --- equality, derivatives, Lie-Trotter -------------------------------------

def test_equality_examples():
    res = iq.equality_diagnostic(np.diag([1.0, -2.0, 0.5]), np.diag([0.3, 0.1, -1.0]), 2.0, 1.0, TRACE)
    assert res.verdict == iq.EQUALITY and abs(res.gap) <= 1e-9 * max(abs(res.rhs), 1)
    pz = iq.equality_diagnostic(Pauli.H, Pauli.K, 2.0, 1.0, TRACE)
    assert pz.gap > 1e-6 and pz.context["gap_exceeds_floor"]
    assert pz.rhs == pytest.approx(Pauli.trace_mean(2.0), rel=1e-10)
    assert pz.lhs == pytest.approx(2 * math.cosh(math.sqrt(5.0)), rel=1e-10)
    H, _ = pair(22)
    shifted = iq.equality_diagnostic(H, H + 0.7 * np.eye(4), 2.0, 1.0, TRACE)
    assert shifted.context["commutator"] <= 1e-12 and shifted.verdict == iq.EQUALITY
    with pytest.raises(DomainError):
        iq.equality_diagnostic(H, H, 2.0, 1.0, NormSelector("operator"))


def test_derivative_examples():
    Hc, Kc = commuting(23)
    for res in iq.derivative_identities(Hc, Kc, 1.0, 1e-4):
        assert res.verdict == iq.EQUALITY
    _, K = pair(24, 3)
    zero = iq.derivative_identities(np.zeros((3, 3)), K, 2.0, 1e-4)
    assert zero[0].verdict == iq.EQUALITY
    assert zero[0].rhs == pytest.approx(-np.trace(K).real, abs=1e-12)
    H, K = pair(25, 3)
    results = iq.derivative_identities(H, K, 1.0, 1e-4)
    assert [r.check_id for r in results] == ["derivative_t0", "derivative_t2", "derivative_fd_t0", "derivative_fd_t2"]
    assert all(r.passed for r in results)
    with pytest.raises(DomainError):
        iq.derivative_identities(H, K, 1.0, 0.1)


def test_lie_trotter_examples():
    ms = (8, 16, 32, 64, 128, 256)
    Hc, Kc = commuting(26)
    res = iq.lie_trotter_check(Hc, Kc, ms)
    assert res.verdict == iq.EQUALITY and max(res.context["errors"]) <= 1e-10
    H, K = pair(27)
    res = iq.lie_trotter_check(H, K, ms)
    assert res.passed
    assert all(0.3 <= v <= 0.7 for v in res.context["ratios"].values())
    errs = iq.trotter_errors(Pauli.H, Pauli.K, [8, 256])
    assert errs[1] <= errs[0]
    with pytest.raises(ValueError):
        iq.lie_trotter_check(H, K, (16, 8))


# --- convexity, conjecture ---------------------------------------------------

def test_convexity_examples(rng):
    X, Y = np_expm_h(rand_herm(rng, 3)), np_expm_h(rand_herm(rng, 3))
    same = iq.convexity_checks(X, Y, X, Y, 0.5)
    assert same.verdict == iq.EQUALITY
    assert iq.convexity_checks([[1.0]], [[4.0]], [[4.0]], [[1.0]], 0.5).verdict == iq.HOLDS
    X2, Y2 = np_expm_h(rand_herm(rng, 3)), np_expm_h(rand_herm(rng, 3))
    res = iq.convexity_checks(X, Y, X2, Y2, 1.5)
    assert res.verdict == iq.HOLDS and res.context["form"] == "convex"
    assert iq.convexity_checks(X, Y, X2, Y2, 3.0).verdict == iq.NOT_APPLICABLE
    batch = iq.convexity_checks(X, Y, X2, Y2, [-0.5, 0.25, 1.5, 3.0])
    single = [iq.convexity_checks(X, Y, X2, Y2, t) for t in (-0.5, 0.25, 1.5, 3.0)]
    assert [r.verdict for r in batch] == [r.verdict for r in single]
    assert batch[1].gap == pytest.approx(single[1].gap, rel=1e-9, abs=1e-12)


def test_monotonicity(rng):
    X, Y = np_expm_h(rand_herm(rng, 3)), np_expm_h(rand_herm(rng, 3))
    G = rng.standard_normal((3, 3))
    X2 = X + G @ G.T
    Y2 = Y + np.eye(3)
    assert iq.monotonicity_check(X, Y, X2, Y2, 0.4).verdict == iq.HOLDS
    assert iq.monotonicity_check(X2, Y2, X, Y, 0.4).verdict == iq.NOT_APPLICABLE
    assert iq.monotonicity_check(X, Y, X2, Y2, 1.5).verdict == iq.NOT_APPLICABLE


def test_conjecture_records_only():
    Hc, Kc = commuting(28)
    res = iq.conjecture_fuzz(Hc, Kc, 3.0)
    assert res.verdict == iq.RECORDED and abs(res.context["difference"]) <= 1e-9 * res.rhs
    H, K = pair(29)
    res = iq.conjecture_fuzz(H, K, 2.0)
    assert abs(res.context["difference"]) <= 1e-8 * res.rhs
    for t in (2.5, 3.0, 4.0):
        assert iq.conjecture_fuzz(H, K, t).verdict == iq.RECORDED
    with pytest.raises(DomainError):
        iq.conjecture_fuzz(H, K, 1.5)


def test_mean_singular_values_power_r():
    H, K = pair(30, 3)
    r, t = 2.0, 1.7
    M = mpow(mpow(mexp(r * H), 0.5) @ mpow(mpow(mexp(r * H), -0.5) @ mexp(r * K) @ mpow(mexp(r * H), -0.5), t)
             @ mpow(mexp(r * H), 0.5), 1 / r)
    np.testing.assert_allclose(iq.mean_singular_values(H, K, [t], r)[0], np.linalg.eigvalsh(M)[::-1], rtol=1e-9)


def test_sandwich_eigs_keep_small_eigenvalues_accurate(rng):
    # commuting factors: the eigenvalues of P Q P are exactly p^2 q
    U = random_unitary(4, rng)
    p = np.array([1e3, 3.0, 0.2, 1e-3])
    q = np.array([5e2, 0.7, 4.0, 2e-3])

    def sandwich(d):
        return (U * d) @ U.conj().T

    got = iq._sandwich_eigs(sandwich(p), sandwich(q), sandwich(1 / p), sandwich(1 / q))
    ref = np.sort(p**2 * q)[::-1]
    err = np.abs(np.log(got) - np.log(ref))
    # extremes are accurate to rounding; the middle of the spectrum to eps * sqrt(cond)
    assert max(err[0], err[-1]) <= 1e-12
    assert np.max(err) <= 10 * np.finfo(float).eps * np.sqrt(ref[0] / ref[-1])
    one_sided = np.linalg.eigvalsh(sandwich(p) @ sandwich(q) @ sandwich(p))[::-1]
    assert abs(np.log(abs(one_sided[-1])) - np.log(ref[-1])) > 1e-6

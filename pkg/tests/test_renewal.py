import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinlab import build_kernel, free_event_probability, renewal_mass, sample_free_renewal
from pinlab.errors import BudgetExceeded
from pinlab.renewal import RenewalTrajectory, kernel_mass, normalization_sum, tail_mass

import oracles
from conftest import kernel

# 1/zeta(3/2) and 1/(zeta(3/2) 2^{3/2}), evaluated with mpmath at 30 digits
K1_HALF = 0.382793383999426562
K2_HALF = 0.135337898809670290


def test_k1_matches_zeta():
    k = kernel(0.5)
    assert k.K(1) == pytest.approx(K1_HALF, rel=1e-12)
    assert kernel_mass(k, 2) == pytest.approx(K2_HALF, rel=1e-12)


@pytest.mark.parametrize("alpha,r", [(0.5, 1), (0.3, 1), (1.5, 1), (0.5, 3), (0.05, 2)])
def test_tables_match_hurwitz_zeta(alpha, r):
    k = build_kernel(alpha, horizon=300, support_min=r)
    K, Kp = oracles.kernel_values(alpha, r, 300)
    np.testing.assert_allclose(k.mass, K, rtol=1e-12, atol=0)
    np.testing.assert_allclose(k.tail, Kp, rtol=1e-12, atol=0)


@pytest.mark.parametrize("alpha", [0.05, 0.3, 0.5, 1.0, 1.5, 3.0])
def test_normalization_identity(alpha):
    k = build_kernel(alpha, horizon=2000, support_min=2)
    N = np.arange(k.horizon + 1)
    assert np.max(np.abs(np.cumsum(k.mass) + k.tail - 1.0)) <= 1e-12
    assert k.normalization_residual() <= 1e-12
    assert tail_mass(k, 0) == 1.0 and k.Kplus(1) == 1.0
    assert np.all(np.diff(k.tail) <= 0)
    assert np.all(k.mass[:2] == 0) and k.K(2) > 0
    np.testing.assert_allclose(k.tail[:-1] - k.tail[1:], k.mass[1:], rtol=1e-9, atol=1e-15)
    # n^{1+alpha} K(n) is the constant c
    np.testing.assert_allclose(k.mass[2:] * N[2:] ** (1 + alpha), k.c, rtol=1e-12)


def test_normalization_bracket_width():
    S, N, width = normalization_sum(0.5)
    assert width < 1e-13
    assert 1 / S == pytest.approx(K1_HALF, rel=1e-13)


def test_log_tables_consistent(k05):
    np.testing.assert_allclose(np.exp(k05.log_mass[1:]), k05.mass[1:], rtol=1e-13)
    np.testing.assert_allclose(np.exp(k05.log_tail), k05.tail, rtol=1e-13)
    assert k05.logK(1) == pytest.approx(math.log(K1_HALF), rel=1e-13)
    assert k05.logKplus(0) == 0.0


@pytest.mark.parametrize("kw,msg", [
    (dict(alpha=0.0), "alpha"),
    (dict(alpha=-1.0), "alpha"),
    (dict(alpha=math.inf), "alpha"),
    (dict(alpha=0.5, family="stretched"), "family"),
    (dict(alpha=0.5, horizon=2, support_min=3), "horizon"),
    (dict(alpha=0.5, support_min=0), "support_min"),
])
def test_build_kernel_rejects(kw, msg):
    with pytest.raises(ValueError, match=msg):
        build_kernel(**kw)


def test_lookup_out_of_range(k05):
    with pytest.raises(IndexError):
        k05.K(k05.horizon + 1)
    with pytest.raises(IndexError):
        k05.Kplus(-1)


def test_trajectory_validation():
    t = RenewalTrajectory((0, 2, 5), 7)
    assert t.gaps == (2, 3) and t.last == 5 and t.contacts == 3
    assert t.indicator().tolist() == [1, 0, 1, 0, 0, 1, 0, 0]
    for bad in [(), (1, 2), (0, 3, 3), (0, 9)]:
        with pytest.raises(ValueError):
            RenewalTrajectory(bad, 7)


def test_sampler_first_gap(k05):
    rng = np.random.default_rng(20240601)
    n_samp = 200_000
    hits = sum(sample_free_renewal(k05, 1, rng).contacts == 2 for _ in range(n_samp))
    p = hits / n_samp
    se = math.sqrt(K1_HALF * (1 - K1_HALF) / n_samp)
    assert abs(p - K1_HALF) < 3 * se


def test_sampler_final_gap_event(k05):
    n, b = 40, 0.25
    g = math.ceil(b * n)
    rng = np.random.default_rng(7)
    size = 40_000
    # {tau_last <= n - bn} is the complement of {n - tau_last < bn}
    exact = 1.0 - free_event_probability(k05, n, require_final_gap_below=g)
    emp = np.mean([sample_free_renewal(k05, n, rng).last <= n - g for _ in range(size)])
    assert abs(emp - exact) < 3 * math.sqrt(exact * (1 - exact) / size)


def test_sampler_always_starts_at_origin(k05):
    rng = np.random.default_rng(3)
    for _ in range(200):
        t = sample_free_renewal(k05, 30, rng)
        assert t.epochs[0] == 0 and t.last <= 30


def test_full_event_is_certain(k05):
    assert free_event_probability(k05, 1) == pytest.approx(1.0, abs=1e-12)
    assert free_event_probability(k05, 500) == pytest.approx(1.0, abs=1e-12)
    assert free_event_probability(k05, 50, max_contacts=51) == pytest.approx(1.0, abs=1e-12)


def _brute(alpha, r, n, max_c, cap, final):
    K, Kp = oracles.kernel_values(alpha, r, n)
    tot = 0.0
    for ep in oracles.configurations(n, "free"):
        if max_c is not None and len(ep) > max_c:
            continue
        if cap is not None and any(g >= cap for g in oracles.gaps(ep)):
            continue
        if final is not None and n - ep[-1] >= final:
            continue
        tot += oracles.free_prob(ep, n, K, Kp)
    return tot


def test_ten_sites_two_contacts():
    k = kernel(0.5)
    exact = _brute(0.5, 1, 10, 2, None, None)
    assert free_event_probability(k, 10, max_contacts=2) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("alpha,r", [(0.5, 1), (0.3, 2), (1.5, 1)])
def test_event_probability_vs_enumeration(alpha, r):
    k = kernel(alpha, r)
    rng = np.random.default_rng(11)
    for n in (1, 5, 9, 12):
        for _ in range(6):
            max_c = None if rng.random() < 0.3 else int(rng.integers(1, n + 2))
            cap = None if rng.random() < 0.3 else int(rng.integers(1, n + 2))
            final = None if rng.random() < 0.3 else int(rng.integers(1, n + 2))
            exact = _brute(alpha, r, n, max_c, cap, final)
            got = free_event_probability(k, n, max_c, cap, final)
            if exact == 0:
                assert got == 0
            else:
                assert got == pytest.approx(exact, rel=1e-10)


def test_renewal_mass_self_consistent(k05):
    u = renewal_mass(k05, 300)
    assert u[0] == 1.0 and u[1] == pytest.approx(K1_HALF, rel=1e-13)
    for m in (2, 17, 150, 300):
        assert u[m] == pytest.approx(sum(k05.K(j) * u[m - j] for j in range(1, m + 1)), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 60), c=st.integers(1, 30), cap=st.integers(1, 40), fin=st.integers(1, 40))
def test_event_probability_monotone(n, c, cap, fin):
    k = kernel(0.5)
    p = free_event_probability(k, n, c, cap, fin)
    assert 0.0 <= p <= 1.0 + 1e-12
    assert free_event_probability(k, n, c + 1, cap, fin) >= p - 1e-15
    assert free_event_probability(k, n, c, cap + 1, fin) >= p - 1e-15
    assert free_event_probability(k, n, c, cap, fin + 1) >= p - 1e-15


def test_count_budget(k05):
    with pytest.raises(BudgetExceeded):
        free_event_probability(k05, 4000, max_contacts=3000, budget=2**21)

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bfilab.errors import DomainError
from bfilab.progressions import _psi_from_counts, delta_sum, divisor_switch_check, psi

L = math.log


def test_psi_examples():
    assert psi(20, 1, 1).psi == pytest.approx(19.2656, abs=1e-4)
    t = psi(30, 4, 1)
    assert t.psi == pytest.approx(2 * L(5) + L(3) + L(13) + L(17) + L(29), rel=1e-15)
    assert t.psi == pytest.approx(13.083, abs=1e-3)


def test_psi_range_conventions():
    # n = 2 is the residue itself: counted only when the tally starts at 1
    full = psi(10, 3, 2, above_abs_a=False)
    assert full.psi == pytest.approx(2 * L(2) + L(5), rel=1e-15)
    assert full.psi == pytest.approx(2.9957, abs=1e-4)
    above = psi(10, 3, 2)
    assert above.psi == pytest.approx(L(5) + L(2), rel=1e-15)
    assert above.above_abs_a and not full.above_abs_a


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3000), st.integers(1, 40), st.integers(-50, 50))
def test_psi_against_enumeration(x, q, a):
    t = psi(x, q, a)
    assert t.psi == pytest.approx(oracles.psi_ap(x, q, a, abs(a)), rel=1e-13, abs=1e-13)
    assert 0 <= t.theta <= t.psi
    assert t.prime_count == sum(1 for n in range(abs(a) + 1, x + 1) if (n - a) % q == 0 and oracles.is_prime(n))


def test_residue_class_completeness():
    rng = random.Random(3)
    for _ in range(10):
        x, q = rng.randint(2, 10**5), rng.randint(1, 50)
        whole = psi(x, 1, 1, above_abs_a=False)
        parts = [psi(x, q, a, above_abs_a=False) for a in range(q)]
        merged: dict[int, int] = {}
        for t in parts:
            for p, k in t.prime_power_counts.items():
                merged[p] = merged.get(p, 0) + k
        assert merged == whole.prime_power_counts
        assert _psi_from_counts(merged) == whole.psi
        assert math.fsum(t.psi for t in parts) == pytest.approx(whole.psi, rel=1e-13)


def test_psi_monotone_in_x():
    vals = [psi(x, 7, 3).psi for x in range(10, 2000, 37)]
    assert all(v1 <= v2 for v1, v2 in zip(vals, vals[1:]))


def test_psi_errors():
    with pytest.raises(DomainError):
        psi(1, 3, 1)
    with pytest.raises(DomainError):
        psi(10, 0, 1)


def test_delta_empty():
    assert delta_sum(1000, 1, 0, 1) == 0.0


def test_delta_methods_agree_worked_instance():
    s = delta_sum(10**4, 1, 10, 1)
    t = delta_sum(10**4, 1, 10, 1, method="divisor_transform")
    assert s == pytest.approx(t, rel=1e-9)


@pytest.mark.parametrize("x,r,Q,a", [(1000, 2, 5, 1), (1200, 3, 40, -2), (900, 1, 30, 6), (2000, 5, 7, 3)])
def test_delta_against_brute_force(x, r, Q, a):
    expected = oracles.delta_brute(x, r, Q, a)
    for method in ("stepping", "divisor_transform"):
        assert delta_sum(x, r, Q, a, method=method) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_delta_random_grid():
    rng = random.Random(11)
    done = 0
    while done < 20:
        x = rng.randint(100, 10**5)
        r = rng.randint(1, 10)
        a = rng.choice([1, -1, 2, -3, 5, 6, 7])
        if math.gcd(r, abs(a)) != 1:
            continue
        Q = rng.randint(1, x // r)
        s = delta_sum(x, r, Q, a)
        t = delta_sum(x, r, Q, a, method="divisor_transform")
        assert s == pytest.approx(t, rel=1e-9, abs=1e-7 * x)
        done += 1


def test_delta_subtract_lambda_a_option():
    base = delta_sum(5000, 2, 30, 5)
    extra = delta_sum(5000, 2, 30, 5, subtract_lambda_a=True)
    n_q = sum(1 for q in range(1, 31) if q % 5)
    assert extra == pytest.approx(base - n_q * L(5), rel=1e-12)


def test_delta_threads_identical():
    assert delta_sum(10**5, 3, 20000, 1, threads=1) == delta_sum(10**5, 3, 20000, 1, threads=8)


def test_delta_errors():
    with pytest.raises(DomainError):
        delta_sum(1000, 2, 10, 4)
    with pytest.raises(DomainError):
        delta_sum(1000, 2, 600, 1)
    with pytest.raises(DomainError):
        delta_sum(1000, 1, 10, 1, method="other")


def test_switch_worked_instance():
    rep = divisor_switch_check(30, 2, 3, 1)
    assert set(rep.lhs_pairs) == {(13, 6), (29, 7), (17, 8), (19, 9), (23, 11), (29, 14)}
    assert rep.diff == pytest.approx(L(11), abs=1e-12)
    assert len(rep.unmatched) == 1
    u = rep.unmatched[0]
    assert (u["side"], u["p"], u["s"], u["q"]) == ("rhs", 11, 1, 5)
    assert u["violates"] == ["q > x/(rP)"]


def test_switch_empty_range():
    rep = divisor_switch_check(10, 20, 2, 1)
    assert rep.lhs == 0 and rep.lhs_pairs == [] and rep.rhs_pairs == []


def _recheck(x, r, P, a, u):
    """Count failed constraints of the partner pair by direct evaluation."""
    p, q, s = u["p"], u["q"], u["s"]
    if u["side"] == "lhs":
        tests = [s >= 1, s < P - a * P / x, math.gcd(s, abs(a)) == 1, s * x / P + a <= p, p <= x]
    else:
        tests = [x / (r * P) < q, q * r <= x, math.gcd(q, abs(a)) == 1, abs(a) < p <= x]
    return sum(1 for t in tests if not t)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(30, 10**5),
    st.integers(1, 5),
    st.integers(2, 20),
    st.sampled_from([1, -1, 2, -2, 3]),
)
def test_switch_property(x, r, P, a):
    if math.gcd(r, abs(a)) != 1:
        return
    rep = divisor_switch_check(x, r, P, a)
    assert abs(rep.diff) <= 4 * L(x) ** 2
    assert rep.lhs == pytest.approx(math.fsum(L(p) for p, _ in rep.lhs_pairs), rel=1e-15)
    assert rep.diff == rep.rhs - rep.lhs
    for u in rep.unmatched:
        n_bad = _recheck(x, r, P, a, u)
        assert n_bad == len(u["violates"])
        if a > 0:
            assert n_bad == 1
        else:
            # the literal lower limit sx/P + a admits p <= |a| for negative a,
            # whose partner can fail the gcd and range tests together
            assert n_bad >= 1
        pair = (u["p"], u["q"]) if u["side"] == "lhs" else (u["p"], u["s"])
        assert pair in (rep.lhs_pairs if u["side"] == "lhs" else rep.rhs_pairs)


def test_switch_negative_a_boundary():
    rep = divisor_switch_check(30, 1, 8, -2)
    small = [u for u in rep.unmatched if u["p"] == 2]
    assert small == [{"side": "rhs", "p": 2, "q": 4, "s": 1, "violates": ["(q,a) = 1", "|a| < p <= x"]}]


def test_switch_bound_on_small_grid():
    worst = 0.0
    for x in range(3, 200):
        for P in range(2, 25):
            for a in (1, 2, -1, -3):
                rep = divisor_switch_check(x, 1, P, a, enforce_bound=False)
                worst = max(worst, abs(rep.diff) / (4 * L(x) ** 2))
    assert worst <= 1.0

import math
import warnings

import pytest

import oracles
from bfilab.bfi_experiments import (
    ExperimentConfig,
    deviation_table,
    mu_average,
    nu_average,
    nu_measurement,
    prop61_bracket,
    prop61_check,
)
from bfilab.errors import DomainError

L = math.log
# |aggregate(M=4.5) - aggregate(M=4)| / (x loglog 4.5 / 4.5^2) measured 0.027 at x=10^5, R=6, a=1
NONINTEGER_M_C = 0.05


def cfg(*args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ExperimentConfig(*args, override_lambda_guard=True, **kw)


def test_mu_cases():
    assert mu_average(6, 7, 50) == 0.0
    assert mu_average(5, 1, 100) == pytest.approx(-0.5 * L(5), rel=1e-15)
    assert mu_average(5, 1, 100) == pytest.approx(-0.8047, abs=1e-4)
    assert mu_average(-8, 3, 9) == pytest.approx(-0.5 * L(2), rel=1e-15)
    assert mu_average(1, 1, math.e**2) == pytest.approx(-1 - oracles.C5_1, rel=1e-13)
    assert mu_average(1, 1, math.e**2) == pytest.approx(-3.0852, abs=1e-4)
    assert mu_average(-1, 6, 10) == pytest.approx(-0.5 * L(10) - oracles.c5(6), rel=1e-13)


def test_mu_is_total():
    for a in list(range(-60, 0)) + list(range(1, 61)):
        r = next(r for r in range(1, 100) if math.gcd(r, abs(a)) == 1 and r > 1)
        omega = len(oracles.trial_factor(abs(a)))
        v = mu_average(a, r, 20)
        if omega >= 2:
            assert v == 0.0
        elif omega == 1:
            assert v == -0.5 * L(min(oracles.trial_factor(abs(a))))
        else:
            assert v < 0


def test_mu_log_difference():
    for r in (1, 2, 6, 35):
        for M1, M2 in ((2, 8), (10, 1000), (3.5, 77.25)):
            diff = mu_average(1, r, M2) - mu_average(1, r, M1)
            assert diff == pytest.approx(-0.5 * L(M2 / M1), rel=1e-12)


def test_nu_cases():
    zero = nu_average(30, 100, 10)
    assert zero.value == 0.0
    three = nu_average(3, 10**4, 100)
    assert three.leading == pytest.approx(0.5 * L(3), rel=1e-15)
    assert three.leading == pytest.approx(0.5493, abs=1e-4)
    assert three.bracket == 0.01
    coprime = sum(1 for r in range(1, 101) if r % 3)
    assert three.multiplier == pytest.approx(1.5 * coprime / 100, rel=1e-15)
    one = nu_average(1, 10**4, 100)
    assert one.value == pytest.approx(0.5 * L(10**4) + oracles.C6, rel=1e-13)
    assert one.value == pytest.approx(7.437, abs=1e-3)
    assert one.bracket == pytest.approx(L(10**6) / 100, rel=1e-15)
    assert nu_average(1, 100, 7.5).multiplier == 7 / 7.5


def test_config_validation():
    with pytest.raises(DomainError):
        ExperimentConfig(10**5, 20, 10, 1)
    with pytest.warns(UserWarning):
        ExperimentConfig(10**5, 20, 10, 1, override_lambda_guard=True)
    with pytest.raises(DomainError):
        ExperimentConfig(10**5, 2, 0.5, 1)
    with pytest.raises(DomainError):
        ExperimentConfig(10**5, 2, 2, 0)
    with pytest.raises(DomainError):
        ExperimentConfig(10**5, 2, 2, 1, mode="other")


def test_moduli_and_budgets():
    c = cfg(10**5, 20, 10, 6, mode="dyadic")
    assert c.moduli() == [11, 13, 17, 19]
    assert c.budget(11) == 10**5 // 110
    f = cfg(10**5, 20, 10, 6, mode="full")
    assert f.moduli() == [1, 5, 7, 11, 13, 17, 19]
    assert f.budget(5) == f.budget(19) == 500


def test_empty_dyadic_table():
    t = deviation_table(cfg(10**4, 0.5, 10, 1))
    assert t.rows == [] and t.aggregate == 0.0


def test_dyadic_rows_against_single_pass():
    c = cfg(10**5, 4, 10, 1)
    t = deviation_table(c)
    assert [r.r for r in t.rows] == [3, 4]
    expect = oracles.inner_sums_single_pass(10**5, {3: 3333, 4: 2500}, 1)
    for row in t.rows:
        assert row.inner == pytest.approx(expect[row.r], rel=1e-9)
        pred = 10**5 / (row.r * 10) * (-0.5 * L(10) - oracles.c5(row.r))
        assert row.prediction == pytest.approx(pred, rel=1e-12)
        assert row.abs_dev == abs(row.inner - row.prediction)
    assert t.aggregate == math.fsum(r.abs_dev for r in t.rows)


def test_full_mode_rows_against_single_pass():
    c = cfg(30000, 6, 5, -2, mode="full")
    t = deviation_table(c)
    assert [r.r for r in t.rows] == [1, 3, 5]
    Q = 30000 // 30
    expect = oracles.inner_sums_single_pass(30000, {r: Q for r in (1, 3, 5)}, -2)
    for row in t.rows:
        assert row.inner == pytest.approx(expect[row.r], rel=1e-9)
        pred = 0.5 * 30000 / 30 * (-0.5 * L(2))
        assert row.prediction == pytest.approx(pred, rel=1e-12)


def test_threads_do_not_change_tables():
    c = cfg(2 * 10**5, 12, 8, 1, mode="full")
    assert deviation_table(c, threads=1) == deviation_table(c, threads=4)


def test_nu_measurement():
    with pytest.raises(DomainError):
        nu_measurement(cfg(10**5, 4, 4, 1))
    res = nu_measurement(cfg(10**5, 4, 4, 30, mode="full"))
    assert res["predicted_nu"] == 0.0 and math.isfinite(res["measured_nu"])
    one = cfg(10**5, 4, 1, 1, mode="full")
    first, second = nu_measurement(one), nu_measurement(one)
    assert first == second
    assert math.isfinite(first["measured_nu"])
    c = cfg(10**5, 4, 4, 3, mode="full")
    res = nu_measurement(c)
    rows = deviation_table(c).rows
    raw = math.fsum(abs(r.inner) for r in rows)
    assert res["measured_nu"] == pytest.approx(raw * (3 / 2) ** 2 * 4 / 10**5, rel=1e-15)


def test_prop61_weight_zero_boundary():
    x, r = 10**5, 3
    fam_c1 = oracles.c1(1, r)
    fam_c3 = oracles.c2(1, r) - fam_c1
    assert prop61_bracket(x, r, 1, 1) == pytest.approx(x * (fam_c1 / r * L(3) + fam_c3 / r), rel=1e-12)


def test_prop61_against_independent_pieces():
    x, R, M, a = 10**5, 6, 4, 1
    res = prop61_check(x, R, M, a, override_lambda_guard=True)
    rs = [4, 5, 6]
    inner = oracles.inner_sums_single_pass(x, {r: x // (r * M) for r in rs}, a)
    total = []
    for r in rs:
        c1, c3 = oracles.c1(a, r), oracles.c2(a, r) - oracles.c1(a, r)
        wsum = math.fsum((1 - s / M) / oracles.phi(r * s) for s in range(1, M + 1))
        bracket = x * (c1 / r * L(oracles.rad(r) * M) + c3 / r - wsum)
        total.append(abs(inner[r] - bracket))
    assert res["aggregate"] == pytest.approx(math.fsum(total), rel=1e-8)
    assert set(res["x_over_logA"]) == {"1", "2", "3"}


def test_prop61_non_integer_M():
    x = 10**5
    a4 = prop61_check(x, 6, 4, 1, override_lambda_guard=True)["aggregate"]
    a45 = prop61_check(x, 6, 4.5, 1, override_lambda_guard=True)["aggregate"]
    assert abs(a45 - a4) <= NONINTEGER_M_C * x * L(L(4.5)) / 4.5**2

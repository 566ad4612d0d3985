import math
from fractions import Fraction
from math import isqrt

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from mahlerkit.algebra import RealInterval, eval_series_real
from mahlerkit.approx import difference_spacing
from mahlerkit.errors import InputError
from mahlerkit.exponent import (
    combine_ARLem,
    continued_fraction,
    convergents_from_quotients,
    empirical_exponent,
    convergent_parameters,
    power_less,
    relaxed_combined_log2,
    rho_check,
    rho_less,
    theoretical_bound,
)
from oracles import continued_fraction_oracle, fredholm_value


def sqrt_interval(n, digits=300):
    """Enclosure of sqrt(n) with decimal endpoints."""
    scale = 10 ** digits
    root = isqrt(n * scale * scale)
    return RealInterval(Fraction(root, scale), Fraction(root + 1, scale))


def golden(digits=300):
    s = sqrt_interval(5, digits)
    return RealInterval((1 + s.lower) / 2, (1 + s.upper) / 2)


def test_maineffective_value():
    rep = theoretical_bound("maineffective", H=1, d=2, k=2)
    assert rep.value == 2 ** 28 == 268435456
    assert rep.log2 == 28 and rep.log2_exact


def test_acthm2_value():
    assert theoretical_bound("ACthm2", d=2, k=2, m=2).value == 20


def test_regularkkernel_log10():
    rep = theoretical_bound("regularkkernel", k=2, L=1)
    assert rep.value == 39 ** 128
    with mpmath.workdps(50):
        expected = 128 * mpmath.log10(39)
        assert abs(rep.log10 - expected) < mpmath.mpf(10) ** -30
    assert rep.log10_str(14).startswith("203.65626969939")


def test_tower_bound_stays_in_log_space():
    rep = theoretical_bound("thestuff", H=2, d=3, k=3, h=5)
    assert rep.value is None
    assert rep.log2 > 10 ** 10


def test_unknown_formula_and_bad_parameters():
    with pytest.raises(InputError):
        theoretical_bound("nope", H=1)
    with pytest.raises(InputError):
        theoretical_bound("maineffective", H=0, d=1, k=2)
    with pytest.raises(InputError):
        theoretical_bound("maineffective", H=1, d=1)


def test_hypothesis_marks_report():
    good = theoretical_bound("maineffective", H=1, d=1, k=2, a=1, b=2)
    bad = theoretical_bound("maineffective", H=1, d=1, k=2, a=3, b=8)
    assert good.applicable and not bad.applicable
    assert bad.value == good.value


GRID = [(H, d, k) for H in (1, 2, 3) for d in (1, 2, 3, 4) for k in (2, 3, 4)]


@pytest.mark.parametrize("formula, names", [
    ("maineffective", ("H", "d", "k")),
    ("main", ("H", "d", "k")),
    ("regularkkernel", ("k", "L")),
    ("ACthm2", ("d", "k", "m")),
    ("thestuff", ("H", "d", "k", "h")),
])
def test_bounds_monotone(formula, names):
    base = {n: 1 if n != "k" else 2 for n in names}
    for name in names:
        values = []
        for v in range(base[name], base[name] + 3):
            params = dict(base, **{name: v})
            values.append(theoretical_bound(formula, **params).log2)
        assert values == sorted(values)


@pytest.mark.parametrize("H, d, k", GRID)
def test_main_dominates_maineffective(H, d, k):
    assert theoretical_bound("main", H=H, d=d, k=k).log2 >= theoretical_bound("maineffective", H=H, d=d, k=k).log2


@pytest.mark.parametrize("H, d, k", GRID)
def test_relaxation_chain(H, d, k):
    m = difference_spacing(k, d, H)
    params = convergent_parameters(k, d, m)
    if d == 1:
        with pytest.raises(InputError, match="delta <= varrho"):
            combine_ARLem(None, params["delta"], params["varrho"], params["theta"], params["ell"])
        return
    combined = combine_ARLem(None, params["delta"], params["varrho"], params["theta"], params["ell"]).value
    assert combined == 3 * d ** 4 * k ** (2 * m * (d - 1))
    with mpmath.workdps(60):
        log2 = theoretical_bound("maineffective", H=H, d=d, k=k).log2
        final = mpmath.mpf(log2.numerator) / log2.denominator
        log_combined = mpmath.log(combined.numerator, 2) - mpmath.log(combined.denominator, 2)
        assert log_combined <= relaxed_combined_log2(H, d, k) + mpmath.mpf(10) ** -30
        assert relaxed_combined_log2(H, d, k) <= final


def test_combine_examples():
    assert combine_ARLem(None, 1, 1, 1).value == 2
    assert combine_ARLem(None, Fraction(1, 2), 1, 3, ell=2).value == 2 * 9 * 2
    params = convergent_parameters(2, 2, 9)
    assert combine_ARLem(None, params["delta"], params["varrho"], params["theta"], params["ell"]).value == 12582912
    params = convergent_parameters(2, 2, 9, rho=Fraction(1, 4))
    assert combine_ARLem(None, params["delta"], params["varrho"], params["theta"], params["ell"]).value == \
        3 * Fraction(3, 4) * 16 * 2 ** 18


@pytest.mark.parametrize("delta, varrho, theta, ell, text", [
    (0, 1, 1, 1, "0 < delta"),
    (2, 1, 1, 1, "delta <= varrho"),
    (1, 1, Fraction(1, 2), 1, "theta >= 1"),
    (1, 1, 1, 0, "ell >= 1"),
])
def test_combine_rejects_bad_hypotheses(delta, varrho, theta, ell, text):
    with pytest.raises(InputError, match=text):
        combine_ARLem(None, delta, varrho, theta, ell)


def test_combine_checks_measured_growth():
    qs = [2 ** (2 ** n) for n in range(1, 8)]
    assert combine_ARLem(qs, Fraction(1, 24), 1, 2).theta_violations == ()
    fast = [2 ** (3 ** n) for n in range(1, 8)]
    assert combine_ARLem(fast, Fraction(1, 24), 1, 2).theta_violations


@pytest.mark.parametrize("a, b, kind, params, passed", [
    (1, 7, "maineffective", {"d": 5}, True),
    (2, 9, "maineffective", {"d": 1}, True),
    (3, 8, "maineffective", {"d": 2}, False),
    (-3, 28, "maineffective", {"d": 2}, True),
    (2, 17, "regularkkernel", {"L": 2}, True),
    (2, 16, "regularkkernel", {"L": 2}, False),
])
def test_rho_check_examples(a, b, kind, params, passed):
    assert rho_check(a, b, kind, params).passed is passed


def test_rho_threshold_thestuff():
    v = rho_check(2, 2 ** 130, "thestuff", {"H": 1, "d": 1, "k": 2})
    assert v.threshold == Fraction(1, 64) and v.passed
    assert not rho_check(2, 2 ** 64, "thestuff", {"H": 1, "d": 1, "k": 2}).passed


def test_rho_less_rejects_bad_input():
    with pytest.raises(InputError):
        rho_less(0, 5, Fraction(1, 2))
    with pytest.raises(InputError):
        rho_less(1, 1, Fraction(1, 2))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10 ** 6), st.integers(0, 300), st.integers(1, 10 ** 6), st.integers(0, 300))
def test_power_less_matches_direct(b1, e1, b2, e2):
    assert power_less(b1, e1, b2, e2) == (b1 ** e1 < b2 ** e2)


@settings(max_examples=100, deadline=None)
@given(st.integers(-50, 50).filter(bool), st.integers(2, 10 ** 4), st.integers(1, 6), st.integers(1, 6))
def test_rho_less_matches_floats(a, b, num, den):
    th = Fraction(num, den)
    exact = rho_less(a, b, th)
    lhs = math.log(abs(a)) / math.log(b)
    if abs(lhs - float(th)) > 1e-9:
        assert exact == (lhs < float(th))


def test_golden_ratio_exponent():
    est = empirical_exponent(golden(), max_quotients=150)
    assert est.certified == 150
    assert set(est.quotients) == {1}
    assert not est.rational
    assert abs(est.estimate - 2) < 0.02


def test_rational_expansion_terminates():
    est = empirical_exponent(RealInterval.exact(Fraction(22, 7)))
    assert est.quotients == (3, 7)
    assert est.rational


def test_truncated_prefix_is_reported():
    est = empirical_exponent(golden(20), max_quotients=200)
    assert est.truncated and est.certified < 60


def test_fredholm_quotients_match_oracle(fredholm):
    iv = eval_series_real(fredholm, Fraction(1, 2), 500, (1, 0, 1))
    est = empirical_exponent(iv, max_quotients=200)
    with mpmath.workdps(520):
        oracle = continued_fraction_oracle(fredholm_value(500), 120)
    assert list(est.quotients[:100]) == oracle[:100]
    assert est.certified >= 30
    assert 2 - 1e-3 <= est.estimate <= 2 ** 28


def test_convergents_are_good_approximations():
    iv = sqrt_interval(7, 200)
    quotients, rational, truncated = continued_fraction(iv, 80)
    assert not rational
    for p, q in convergents_from_quotients(quotients):
        assert max(abs(iv.lower - Fraction(p, q)), abs(iv.upper - Fraction(p, q))) < Fraction(1, q * q)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10 ** 4))
def test_quadratic_irrationals_exponent(n):
    assume(isqrt(n) ** 2 != n)
    est = empirical_exponent(sqrt_interval(n, 120), max_quotients=60)
    assert est.certified >= 5
    assert est.estimate >= 2 - 1e-6
    qs = [q for _, q in convergents_from_quotients(est.quotients)]
    assert all(a < b for a, b in zip(qs[1:], qs[2:]))

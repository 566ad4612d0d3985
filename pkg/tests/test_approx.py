import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from mahlerkit.algebra import AtLeast, Polynomial, RealInterval, TruncatedSeries, expand_series
from mahlerkit.approx import (
    Convergent,
    companion_values,
    contact_orders,
    difference_matrix,
    hermite_pade,
    hermite_pade_series,
    integer_convergents,
    iterate_convergents,
    difference_spacing,
    quality_report,
    table_to_dict,
    table_to_tsv,
    valuation_bound,
    valuation_bound_check,
)
from mahlerkit.errors import BudgetError, InputError
from mahlerkit.mahler import MahlerSystem, companion_system
from mahlerkit.polymat import PolyMatrix, RatMatrix
from oracles import fredholm_value

x = Polynomial.x()
HALF = Fraction(1, 2)


def geometric_system(budget=256):
    """(1, 1/(1-x)) with 1/(1-x) = (1+x) G(x^2)."""
    one = TruncatedSeries([1] + [0] * budget, budget)
    geo = TruncatedSeries([1] * (budget + 1), budget)
    return MahlerSystem(2, RatMatrix(PolyMatrix([[1, 0], [0, 1 + x]]), 1), (one, geo))


def b_system(budget=256):
    """(1, G) with G = 1/(1-x) G(x^2), so B = 1 - x."""
    coeffs = [Fraction(0)] * (budget + 1)
    # G = prod 1/(1-x^{2^i}); coefficients are binary partition counts
    coeffs[0] = Fraction(1)
    part = 1
    while part <= budget:
        for n in range(part, budget + 1):
            coeffs[n] += coeffs[n - part]
        part *= 2
    one = TruncatedSeries([1] + [0] * budget, budget)
    g = TruncatedSeries(coeffs, budget)
    return MahlerSystem(2, RatMatrix(PolyMatrix([[1 - x, 0], [0, 1]]), 1 - x), (one, g))


@pytest.fixture
def fred_sys(fredholm):
    return companion_system(fredholm, budget=64)


def test_fredholm_pade(fred_sys):
    pade = hermite_pade(fred_sys)
    assert pade.Q(0) == 1 and pade.Q.deg() <= 4
    assert all(p.deg() <= 4 for p in pade.P)
    assert pade.P[0] == pade.Q
    for o in pade.order:
        assert (o.bound if isinstance(o, AtLeast) else o) >= 8
    # brute-force check of the contact order on the expanded series
    for s, p in zip(fred_sys.series, pade.P):
        diff = s * pade.Q - p
        assert all(c == 0 for c in diff.coeffs[:8])


def test_rational_pade():
    pade = hermite_pade(geometric_system())
    assert pade.Q == 1 - x
    assert pade.P[1] == Polynomial.one()
    assert isinstance(pade.order[1], AtLeast)


def test_pade_polynomial_series():
    one = TruncatedSeries([1] + [0] * 64, 64)
    xs = TruncatedSeries([0, 1] + [0] * 63, 64)
    pade = hermite_pade_series([one, xs], 1)
    assert pade.Q == Polynomial.one() and pade.P[1] == x


def test_pade_budget_error():
    one = TruncatedSeries([1] * 5, 4)
    with pytest.raises(BudgetError) as info:
        hermite_pade_series([one, one], 1)
    assert info.value.required == 12


def test_iterate_fredholm_first_step(fred_sys):
    pade = hermite_pade(fred_sys)
    convs = iterate_convergents(fred_sys, pade, 1)
    assert convs[0] == Convergent(0, pade.P, pade.Q)
    assert convs[1].Q == pade.Q.substitute_power(2)


@pytest.mark.parametrize("make", [b_system, lambda: companion_system(_fredholm(), budget=64)])
def test_product_identity(make):
    sys = make()
    pade = hermite_pade(sys)
    convs = iterate_convergents(sys, pade, 4, term_cap=1 << 16)
    assert len(convs) == 5
    B = sys.B
    for c in convs:
        prod = Polynomial.one()
        for i in range(c.n):
            prod = prod * B.substitute_power(2 ** i)
        assert c.Q == prod * pade.Q.substitute_power(2 ** c.n)


def test_b_system_second_iterate():
    sys = b_system()
    pade = hermite_pade(sys)
    convs = iterate_convergents(sys, pade, 2)
    assert convs[2].Q == (1 - x) * (1 - x * x) * pade.Q.substitute_power(4)


def test_contact_order_grows():
    sys = companion_system(_fredholm(), budget=600)
    pade = hermite_pade(sys)
    convs = iterate_convergents(sys, pade, 4)
    for n, orders in contact_orders(sys, convs):
        for o in orders:
            value = o.bound if isinstance(o, AtLeast) else o
            assert value >= 8 * 2 ** n


def _fredholm():
    from mahlerkit.mahler import MahlerEquation
    return MahlerEquation(2, (-1, 1), x, (0,))


def test_integer_convergent_zero(fred_sys):
    pade = hermite_pade(fred_sys)
    table = integer_convergents(iterate_convergents(fred_sys, pade, 0), 1, 2, 2, 2, 1)
    assert table.rows[0].q == 32 and table.rows[0].p == (32, 26)
    assert table.rows[0].exponent == 5
    assert table.delta == Fraction(1, 24)


def test_integer_convergents_match_rational_values(fred_sys):
    pade = hermite_pade(fred_sys)
    convs = iterate_convergents(fred_sys, pade, 5)
    table = integer_convergents(convs, 1, 2, 2, 2, 1)
    for conv, row in zip(convs, table.rows):
        assert row.q > 0
        for i in range(2):
            assert Fraction(row.p[i], row.q) == conv.P[i](HALF) / conv.Q(HALF)


def test_skipped_row():
    conv = Convergent(0, (1 - 2 * x, x), 1 - 2 * x)
    table = integer_convergents([conv], 1, 2, 2, 2, 1)
    assert table.rows[0].skipped and table.rows[0].q == 1 and table.rows[0].p == (1, 1)


def test_point_zero(fred_sys):
    pade = hermite_pade(fred_sys)
    table = integer_convergents(iterate_convergents(fred_sys, pade, 2), 0, 3, 2, 2, 1)
    for row in table.rows:
        assert row.q == 3 ** row.exponent * abs(int(pade.Q(0)))


def test_integer_convergents_need_coprime(fred_sys):
    pade = hermite_pade(fred_sys)
    with pytest.raises(InputError):
        integer_convergents(iterate_convergents(fred_sys, pade, 0), 2, 4, 2, 2, 1)


def test_difference_spacing_values():
    assert difference_spacing(2, 2, 1) == 9
    assert difference_spacing(3, 1, 1) == 6  # 3^6 = 729 >= 2 * 3^5 = 486


def test_fredholm_quality(fredholm):
    sys = companion_system(fredholm, budget=64)
    pade = hermite_pade(sys)
    table = integer_convergents(iterate_convergents(sys, pade, 5), 1, 2, 2, 2, 1)
    report = quality_report(table, companion_values(fredholm, HALF, (1, 0, 1)), digits=500)
    assert report.upper_holds([2, 3, 4, 5], 1)
    assert abs(report.growth[-1] - 2) < 0.05
    assert report.rational_looking == [True, False]
    # reported errors agree with the oracle value
    row = table.rows[5]
    with mpmath.workdps(520):
        err = abs(fredholm_value(500) - mpmath.mpf(row.p[1]) / row.q)
        assert abs(float(mpmath.log10(err)) - report.rows[5].log10_error[1]) < 1e-3


def test_rational_quality():
    sys = geometric_system()
    pade = hermite_pade(sys)
    table = integer_convergents(iterate_convergents(sys, pade, 4), 1, 3, 2, 2, 1)
    vals = [RealInterval.exact(1), RealInterval.exact(Fraction(3, 2))]
    report = quality_report(table, vals)
    assert report.rational_looking == [True, True]
    assert all(Fraction(r.p[1], r.q) == Fraction(3, 2) for r in table.rows)


def test_quality_checks_value_count(fred_sys):
    pade = hermite_pade(fred_sys)
    table = integer_convergents(iterate_convergents(fred_sys, pade, 1), 1, 2, 2, 2, 1)
    with pytest.raises(InputError):
        quality_report(table, [RealInterval.exact(1)])


def test_q_sandwich(fredholm):
    sys = companion_system(fredholm, budget=64)
    pade = hermite_pade(sys)
    table = integer_convergents(iterate_convergents(sys, pade, 8, term_cap=1 << 12), 1, 2, 2, 2, 1)
    # log q_n - 5 * 2^n log 2 stays bounded since B = 1
    drift = [math.log(r.q) - r.exponent * math.log(2) for r in table.rows]
    assert max(drift) - min(drift) < 2


def test_difference_matrix_fredholm():
    sys = companion_system(_fredholm(), budget=64)
    pade = hermite_pade(sys)
    m = difference_spacing(2, 2, 1)
    assert m == 9
    convs = iterate_convergents(sys, pade, 3 + m, term_cap=1 << 16)
    for n in range(4):
        dm = difference_matrix(convs, n, m)
        assert dm.top_row_zero
        assert dm.rank == 1 and not dm.defect


def test_difference_matrix_fixed_point():
    conv = Convergent(0, (Polynomial.one(), x), Polynomial.one())
    convs = [conv, Convergent(1, conv.P, conv.Q)]
    dm = difference_matrix(convs, 0, 1)
    assert dm.rank == 0 and dm.defect


def test_difference_matrix_needs_entries(fred_sys):
    pade = hermite_pade(fred_sys)
    with pytest.raises(InputError):
        difference_matrix(iterate_convergents(fred_sys, pade, 2), 0, 9)


def test_valuation_bound_values():
    assert valuation_bound(2, 2, 1, 4) == 2048


def test_valuation_bound_examples():
    sys = companion_system(_fredholm(), budget=2100)
    check = valuation_bound_check(sys, [1, 0])
    assert check.observed == 0 and check.passed
    check = valuation_bound_check(sys, [x, -1])
    assert check.observed == 2 and check.bound == 512 and check.passed
    with pytest.raises(InputError):
        valuation_bound_check(sys, [0, 0])


def test_valuation_flags_relation():
    sys = geometric_system(budget=600)
    check = valuation_bound_check(sys, [1, x - 1])
    assert check.relation_found and check.passed


_VAL_SYS = None


def _val_sys():
    global _VAL_SYS
    if _VAL_SYS is None:
        _VAL_SYS = companion_system(_fredholm(), budget=2100)
    return _VAL_SYS


poly4 = st.lists(st.integers(-5, 5), min_size=1, max_size=5).map(Polynomial)


@settings(max_examples=60, deadline=None)
@given(poly4, poly4)
def test_valuation_bound_property(c1, c2):
    if c1.is_zero() and c2.is_zero():
        return
    check = valuation_bound_check(_val_sys(), [c1, c2])
    assert check.passed and not check.relation_found


def test_tsv_and_dict_export(fred_sys):
    pade = hermite_pade(fred_sys)
    table = integer_convergents(iterate_convergents(fred_sys, pade, 3), 1, 2, 2, 2, 1)
    tsv = table_to_tsv(table)
    lines = tsv.strip().split("\n")
    assert lines[0].split("\t") == ["n", "q_n", "p_1", "p_2"]
    assert lines[1].split("\t")[:2] == ["0", "32"]
    data = table_to_dict(table)
    assert data["delta"] == "1/24" and data["rows"][0]["q"] == "32"

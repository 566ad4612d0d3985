from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from mahlerkit.algebra import Polynomial, TruncatedSeries
from mahlerkit.approx import quality_report
from mahlerkit.errors import HypothesisError, InputError
from mahlerkit.mahler import MahlerSystem
from mahlerkit.polymat import PolyMatrix, RatMatrix, determinant
from mahlerkit.regular import (
    LinearRepresentation,
    build_recurrence_matrix,
    fit_representation,
    from_lsd_first,
    important_bound,
    kernel_basis,
    kernel_system,
    reduce_sequence,
    reduce_to_independent,
    regular_to_convergents,
    rho_below,
    syzygy_basis,
    syzygy_search_bound,
)
from oracles import stern, stern_value, thue_morse

x = Polynomial.x()


def sum_series(items):
    items = list(items)
    total = items[0]
    for s in items[1:]:
        total = total + s
    return total


def constant_rep(k=3):
    return LinearRepresentation(k, (1,), tuple(((1,),) for _ in range(k)), (1,))


def test_stern_terms(stern_rep):
    assert [int(t) for t in stern_rep.terms(300)] == stern(299)


def test_thue_morse_terms(thue_morse_rep):
    assert [int(t) for t in thue_morse_rep.terms(256)] == [thue_morse(n) for n in range(256)]


def test_representation_requires_fixed_start():
    with pytest.raises(InputError):
        LinearRepresentation(2, (1, 0), (((1, 1), (0, 1)), ((1, 0), (1, 1))), (1, 0))


def test_representation_check_terms(data_dir):
    import json
    data = json.loads((data_dir / "stern.json").read_text())
    rep = LinearRepresentation.from_dict(data)
    assert rep.check_terms[:6] == tuple(Fraction(v) for v in (0, 1, 1, 2, 1, 3))
    assert LinearRepresentation.from_dict(rep.to_dict()) == rep
    bad = dict(data, check_terms=["0/1", "1/1", "5/1"])
    with pytest.raises(InputError):
        LinearRepresentation.from_dict(bad)


def test_lsd_first_conversion(stern_rep):
    # the transposed data read with least significant digit first
    M = tuple(tuple(tuple(m[j][i] for j in range(2)) for i in range(2)) for m in stern_rep.M)
    rep = from_lsd_first(2, stern_rep.v, M, stern_rep.u)
    assert rep.terms(64) == stern_rep.terms(64)


def test_growth_bound_covers_terms(stern_rep):
    g = stern_rep.growth_bound()
    assert g.rigorous
    for n, t in enumerate(stern_rep.terms(500)):
        assert abs(t) <= g.c * max(n, 1) ** g.r * g.gamma ** n


@pytest.mark.parametrize("rep_name, L", [("stern_rep", 2), ("thue_morse_rep", 2), (None, 1)])
def test_kernel_dimension(rep_name, L, request):
    rep = request.getfixturevalue(rep_name) if rep_name else constant_rep()
    kb = kernel_basis(rep, 128)
    assert kb.L == L
    assert kb.series[0].coeffs[:64] == tuple(rep.terms(64))


def test_kernel_system_relation(stern_rep):
    kb, sys = kernel_system(stern_rep, 256)
    assert sys.verify() == 256
    assert build_recurrence_matrix(kb) == sys.numerator


def test_thue_morse_kernel_matrix(thue_morse_rep):
    _, sys = kernel_system(thue_morse_rep, 256)
    assert sys.numerator == PolyMatrix([[1, x], [x, 1]])


def test_fit_representation():
    terms = stern(2047)
    rep = fit_representation(terms, 2)
    assert rep.empirical and rep.dim == 2
    assert rep.terms(2048) == [Fraction(t) for t in terms]


def test_syzygy_search_bound():
    assert syzygy_search_bound(1, 2) == 2
    assert syzygy_search_bound(2, 2) == 12
    assert syzygy_search_bound(3, 2) == 56


def _diag_system(diag, series):
    n = len(diag)
    grid = [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
    return MahlerSystem(2, RatMatrix(PolyMatrix(grid), 1), tuple(series))


def _tm_product(budget):
    coeffs = [Fraction(0)] * (budget + 1)
    coeffs[0] = Fraction(1)
    poly = [Fraction(1)] + [Fraction(0)] * budget
    p = 1
    while p <= budget:
        poly = [poly[n] - (poly[n - p] if n >= p else 0) for n in range(budget + 1)]
        p *= 2
    return TruncatedSeries(poly, budget)


def test_syzygy_duplicate_series():
    t = _tm_product(256)
    sys = _diag_system([1 - x, 1 - x], [t, t])
    syz = syzygy_basis(sys)
    assert syz.S == 1 and len(syz.basis) == 1
    row = syz.basis[0].row(0)
    assert row[0] == -row[1] and row[0].deg() == 0


def test_syzygy_independent_is_zero(stern_rep):
    t = _tm_product(256)
    geo = TruncatedSeries([1] * 257, 256)
    syz = syzygy_basis(_diag_system([1 - x, 1 + x], [t, geo]))
    assert syz.is_zero and syz.S == 2


def test_syzygy_rational_relation():
    t = _tm_product(512)
    geo = TruncatedSeries([1] * 513, 512)
    one = TruncatedSeries([1] + [0] * 512, 512)
    syz = syzygy_basis(_diag_system([1 - x, 1 + x, 1], [t, geo, one]))
    assert syz.S == 2 and len(syz.basis) == 1
    row = syz.basis[0].row(0)
    lead = row[2]
    assert lead.deg() == 0
    assert [r * Polynomial([1 / lead[0]]) for r in row] == [Polynomial.zero(), x - 1, Polynomial.one()]


def test_stern_syzygy(stern_rep):
    _, sys = kernel_system(stern_rep, 256)
    syz = syzygy_basis(sys)
    assert syz.S == 1
    assert syz.basis[0] == PolyMatrix([[1 + x, -x]])


def test_important_bound():
    assert important_bound(2, 2) == 512
    assert important_bound(1, 2) == 8


@pytest.mark.parametrize("rep_name", ["stern_rep", "thue_morse_rep", None])
def test_reduction_invariants(rep_name, request):
    rep = request.getfixturevalue(rep_name) if rep_name else constant_rep()
    _, red = reduce_sequence(rep, Fraction(1, 2) if rep_name else Fraction(1, 3), 256)
    L, S = red.L, red.S
    assert determinant(red.Y) == Polynomial.one()
    z = [TruncatedSeries([0] * 257, 256) + sum_series(red.series[j] * red.Y[i, j] for j in range(L)) for i in range(L)]
    for i in range(L - S):
        assert z[i].is_zero_to_budget()
    assert max(e.deg() for row in red.C22.numerator.entries for e in row) < important_bound(L, red.k)
    red.system.verify()


def test_stern_reduction(stern_rep):
    _, red = reduce_sequence(stern_rep, Fraction(1, 2), 256)
    assert red.L == 2 and red.S == 1
    assert red.C22.numerator == PolyMatrix([[1 + x + x * x]])


def test_stern_convergents(stern_rep):
    rc = regular_to_convergents(stern_rep, 1, 2, 5)
    assert rc.table.delta == Fraction(1, 24)
    vals = rc.values(60)
    with mpmath.workdps(80):
        ref = stern_value(60)
        mid = mpmath.mpf(vals[1].lower.numerator) / vals[1].lower.denominator
        assert abs(mid - ref) < mpmath.mpf(10) ** -55
    report = quality_report(rc.table, rc.values, digits=300)
    assert report.upper_holds([2, 3, 4, 5], rc.reduction.target_index)
    assert abs(report.growth[-1] - 2) < 0.05


def test_constant_sequence_is_rational():
    rc = regular_to_convergents(constant_rep(), 1, 3, 4)
    assert rc.reduction.C22.numerator == PolyMatrix([[1 + x + x * x]])
    idx = rc.reduction.target_index
    assert {rc.table.ratio(n, idx) for n in range(len(rc.table.rows))} == {Fraction(3, 2)}
    report = quality_report(rc.table, rc.values, digits=100)
    assert report.rational_looking[idx]


def test_thue_morse_convergents(thue_morse_rep):
    rc = regular_to_convergents(thue_morse_rep, 1, 2, 3)
    report = quality_report(rc.table, rc.values, digits=300)
    assert report.upper_holds([2, 3], rc.reduction.target_index)


def test_rho_out_of_range(stern_rep):
    assert rho_below(1, 2, 2) and not rho_below(2, 15, 2) and rho_below(2, 17, 2)
    with pytest.raises(HypothesisError):
        regular_to_convergents(stern_rep, 2, 15, 3)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4), st.lists(st.integers(-3, 3), min_size=4, max_size=4),
       st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_kernel_relation_property(m0, m1, v):
    u = (0, 1)
    M0 = ((1, m0[1]), (0, 1))  # u M0 = u
    M1 = ((m1[0], m1[1]), (m1[2], m1[3]))
    rep = LinearRepresentation(2, u, (M0, M1), tuple(v))
    if all(t == 0 for t in rep.terms(32)):
        return
    kb, sys = kernel_system(rep, 96)
    assert kb.L <= 2
    assert sys.verify() == 96

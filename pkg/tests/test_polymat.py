import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mahlerkit.algebra import Polynomial
from mahlerkit.errors import RankError, UnimodularityError
from mahlerkit.polymat import (
    PolyMatrix,
    RatMatrix,
    adjugate,
    determinant,
    is_unimodular,
    left_kernel_basis,
    rank,
    reduce_first_column,
    right_kernel_basis,
    triangularize,
    unimodular_complete,
)
from generators import random_matrix, random_unimodular_rows, random_unimodular_square
from oracles import X, sympy_coeffs, sympy_det, to_sympy

x = Polynomial.x()


def test_determinant_example():
    m = PolyMatrix([[1, x], [1 - x, 1 + 2 * x]])
    assert determinant(m) == Polynomial([1, 1, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10 ** 6))
def test_determinant_matches_sympy(n, seed):
    m = random_matrix(random.Random(seed), n, n, 2)
    assert determinant(m).coeffs == tuple(sympy_coeffs(sympy_det(m.entries)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 10 ** 6))
def test_rank_matches_sympy(r, c, seed):
    m = random_matrix(random.Random(seed), r, c, 2, rank_drop=True)
    sm = sympy.Matrix([[to_sympy(e) for e in row] for row in m.entries])
    assert rank(m) == sm.rank(simplify=True)


def test_reduce_first_column_gives_gcd():
    m = PolyMatrix([[x * x - 1], [x - 1], [x * x - 2 * x + 1]])
    g, rest, tr = reduce_first_column(m)
    assert g == Polynomial([-1, 1])
    assert tr.matrix * m == PolyMatrix([[g], [0], [0]])
    assert rest.rows == 2 and rest.cols == 0
    assert tr.check()


def test_left_kernel_of_column():
    basis = left_kernel_basis(PolyMatrix([[x], [x * x]]))
    assert len(basis) == 1
    assert basis[0] == PolyMatrix([[-x, 1]])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 10 ** 6))
def test_left_kernel_annihilates_and_counts(r, c, seed):
    m = random_matrix(random.Random(seed), r, c, 2, rank_drop=True)
    basis = left_kernel_basis(m)
    for v in basis:
        assert (v * m).is_zero()
    assert len(basis) + rank(m) == r


def test_right_kernel_annihilates():
    m = PolyMatrix([[1, x, x * x], [x, 1, 0]])
    for col in right_kernel_basis(m):
        assert (m * col).is_zero()


def test_completion_examples():
    u = unimodular_complete(PolyMatrix([[x, 1]]))
    assert u.matrix == PolyMatrix([[0, 1], [1, -x]])
    u = unimodular_complete(PolyMatrix([[2, 0]]))
    assert (PolyMatrix([[2, 0]]) * u.matrix) == PolyMatrix([[1, 0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10 ** 6))
def test_completion_on_random_rows(d, seed):
    rng = random.Random(seed)
    m = rng.randint(1, d)
    t = random_unimodular_rows(rng, m, d, 3)
    u = unimodular_complete(t)
    target = PolyMatrix([[1 if i == j else 0 for j in range(d)] for i in range(m)])
    assert t * u.matrix == target
    assert u.matrix * u.inverse == PolyMatrix.identity(d)
    det = determinant(u.matrix)
    assert det.is_constant() and not det.is_zero()


def test_non_unimodular_row_reports_gcd():
    with pytest.raises(UnimodularityError) as info:
        unimodular_complete(PolyMatrix([[x, x * x]]))
    assert info.value.gcd == x
    assert not is_unimodular(PolyMatrix([[x, x * x]]))


def test_dependent_rows_give_certificate():
    rows = PolyMatrix([[1, x], [x, x * x]])
    with pytest.raises(RankError) as info:
        triangularize(rows)
    cert = info.value.certificate
    assert cert is not None and (cert * rows).is_zero()


def test_triangularize_example():
    lower, g = triangularize(PolyMatrix([[1, x]]))
    assert g.matrix == PolyMatrix([[1, -x], [0, 1]])
    assert PolyMatrix([[1, x]]) * g.matrix == lower


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10 ** 6))
def test_adjugate_identity(n, seed):
    m = random_matrix(random.Random(seed), n, n, 2)
    det = determinant(m)
    assert m * adjugate(m) == PolyMatrix.diagonal([det] * n)


def test_unimodular_square_inverse():
    rng = random.Random(5)
    u = random_unimodular_square(rng, 3, 4)
    assert determinant(u).is_constant()
    assert is_unimodular(u)


def test_ratmatrix_integer_normalization():
    r = RatMatrix(PolyMatrix([[Polynomial([Fraction(1, 2)]), x]]), Polynomial([-2, 4]))
    n = r.integer_normalized()
    assert n.equals(r)
    assert n.denominator[0] > 0
    assert all(c.denominator == 1 for row in n.numerator.entries for e in row for c in e.coeffs)

"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line for its criterion; assertion failures
are re-raised so pytest reports them too.
"""

import contextlib
import random
import time
from fractions import Fraction

import mpmath
import pytest

from mahlerkit.algebra import AtLeast, Polynomial, TruncatedSeries, eval_series_real, expand_series
from mahlerkit.approx import (
    companion_values,
    difference_matrix,
    hermite_pade,
    integer_convergents,
    iterate_convergents,
    difference_spacing,
    quality_report,
    valuation_bound_check,
)
from mahlerkit.exponent import empirical_exponent, theoretical_bound
from mahlerkit.mahler import MahlerEquation, MahlerSystem, companion_system, equation_system, normalize_origin, \
    resolve_singularity
from mahlerkit.polymat import PolyMatrix, RatMatrix, determinant, left_kernel_basis, rank, unimodular_complete
from mahlerkit.regular import LinearRepresentation, important_bound, regular_to_convergents
from generators import random_matrix, random_poly, random_unimodular_rows
from oracles import fredholm_coeffs, fredholm_value, thue_morse_product

x = Polynomial.x()
HALF = Fraction(1, 2)


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def report(number, label):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            with capsys.disabled():
                print(f"\nCRITERION {number:2d} FAIL  {label}: {type(exc).__name__}: {exc}")
            raise
        with capsys.disabled():
            print(f"\nCRITERION {number:2d} PASS  {label} ({time.perf_counter() - start:.2f} s)")
    return report


def fredholm_eq():
    return MahlerEquation(2, (-1, 1), x, (0,))


def thue_morse_eq():
    return MahlerEquation(2, (-1, 1 - x), 0, (1,))


def binary_partition_system(budget):
    """(1, G) with G(x) = G(x^2) / (1 - x), so B = 1 - x."""
    coeffs = [Fraction(0)] * (budget + 1)
    coeffs[0] = Fraction(1)
    part = 1
    while part <= budget:
        for n in range(part, budget + 1):
            coeffs[n] += coeffs[n - part]
        part *= 2
    one = TruncatedSeries([1] + [0] * budget, budget)
    return MahlerSystem(2, RatMatrix(PolyMatrix([[1 - x, 0], [0, 1]]), 1 - x), (one, TruncatedSeries(coeffs, budget)))


def test_criterion_01_pade_order(criterion):
    with criterion(1, "Pade order on the Fredholm companion system"):
        start = time.perf_counter()
        sys = companion_system(fredholm_eq(), budget=64)
        pade = hermite_pade(sys)
        assert sys.dim == 2 and sys.H == 1
        assert pade.Q(0) == 1
        assert pade.Q.deg() <= 4 and all(p.deg() <= 4 for p in pade.P)
        for s, p in zip(sys.series, pade.P):
            nu = (s * pade.Q - p).valuation()
            assert (nu.bound if isinstance(nu, AtLeast) else nu) >= 8
        assert time.perf_counter() - start < 1


def test_criterion_02_product_identity(criterion):
    with criterion(2, "Q_n product identity for n <= 4"):
        start = time.perf_counter()
        for sys in (companion_system(fredholm_eq(), budget=64), binary_partition_system(256)):
            pade = hermite_pade(sys)
            convs = iterate_convergents(sys, pade, 4, term_cap=1 << 16)
            assert [c.n for c in convs] == [0, 1, 2, 3, 4]
            for c in convs:
                prod = Polynomial.one()
                for i in range(c.n):
                    prod = prod * sys.B.substitute_power(2 ** i)
                assert c.Q == prod * pade.Q.substitute_power(2 ** c.n)
        assert binary_partition_system(16).B == 1 - x
        assert time.perf_counter() - start < 5


def test_criterion_03_convergent_quality(criterion):
    with criterion(3, "Fredholm convergents at 1/2: upper bound with delta 1/24 and growth -> 2"):
        eq = fredholm_eq()
        sys = companion_system(eq, budget=64)
        pade = hermite_pade(sys)
        table = integer_convergents(iterate_convergents(sys, pade, 5), 1, 2, 2, 2, 1)
        assert table.delta == Fraction(1, 24)
        values = companion_values(eq, HALF, (1, 0, 1))(500)
        with mpmath.workdps(520):
            oracle = fredholm_value(500)
            assert abs(mpmath.mpf(values[1].lower.numerator) / values[1].lower.denominator - oracle) < \
                mpmath.mpf(10) ** -495
        report = quality_report(table, values, digits=500)
        assert report.upper_holds([2, 3, 4, 5], 1)
        assert abs(report.growth[-1] - 2) <= 0.05


def test_criterion_04_unimodular_completion(criterion):
    with criterion(4, "unimodular completion on 200 random inputs"):
        start = time.perf_counter()
        rng = random.Random(20240601)
        violations = 0
        for _ in range(200):
            d = rng.randint(1, 4)
            m = rng.randint(1, d)
            t = random_unimodular_rows(rng, m, d, 4)
            u = unimodular_complete(t)
            target = PolyMatrix([[1 if i == j else 0 for j in range(d)] for i in range(m)])
            assert t * u.matrix == target
            det = determinant(u.matrix)
            assert det.is_constant() and not det.is_zero()
            h = max(t.max_degree(), 0)
            if u.matrix.max_degree() > (m + 1) * h * 2 ** m or u.inverse.max_degree() > (2 * m + 1) * h * 2 ** m:
                violations += 1
        assert violations == 0
        assert time.perf_counter() - start < 30


def test_criterion_05_kernel_bases(criterion):
    with criterion(5, "left kernel bases annihilate, count and respect the degree bound"):
        rng = random.Random(7)
        for _ in range(150):
            rows, cols = rng.randint(1, 4), rng.randint(1, 4)
            m = random_matrix(rng, rows, cols, 3, rank_drop=rng.random() < 0.5)
            basis = left_kernel_basis(m)
            r = rank(m)
            h = max(m.max_degree(), 0) if not m.is_zero() else 0
            for v in basis:
                assert (v * m).is_zero()
                assert v.max_degree() <= 2 ** r * h
            assert len(basis) + r == rows


def test_criterion_06_normalization(criterion):
    with criterion(6, "origin normalization of the shifted Fredholm equation"):
        eq = MahlerEquation(2, (-x, x), x * x, (0, 1))
        f = TruncatedSeries(fredholm_coeffs(202), 202)
        res = normalize_origin(eq, f)
        assert res.b[0][0] != 0
        assert all(b.deg() <= 27 for b in res.b)
        assert res.M <= 3
        residual = res.tail.residual(res.E)
        assert residual.budget >= 200 and residual.is_zero_to_budget()


def test_criterion_07_singularity(criterion):
    with criterion(7, "singularity removal for B = 1 - 2x at 1/2"):
        beta = Polynomial([1, -2])
        eq = MahlerEquation(2, (beta, -beta * (1 + x * x), beta * x ** 4), 0, (1,))
        sys = equation_system(eq, budget=512)
        assert sys.B == beta
        res = resolve_singularity(sys, 1, 2)
        assert res.s == 1
        assert res.T(HALF) != 0
        check = res.identity_check
        assert check["digits"] >= 50 and check["pass"]
        with mpmath.workdps(60):
            assert abs(mpmath.mpf(check["lhs"]) - mpmath.mpf(check["rhs"])) < mpmath.mpf(10) ** -48


def test_criterion_08_regular_pipeline(criterion):
    with criterion(8, "Stern sequence through the regular pipeline"):
        rep = LinearRepresentation(2, (0, 1), (((1, 1), (0, 1)), ((1, 0), (1, 1))), (1, 0))
        rc = regular_to_convergents(rep, 1, 2, 5)
        red = rc.reduction
        assert red.L == 2
        assert red.system.verify() >= 256
        assert max(e.deg() for row in red.C22.numerator.entries for e in row) < important_bound(2, 2) == 512
        assert rc.table.delta == Fraction(1, 3 * (red.S + 1) ** 3)
        report = quality_report(rc.table, rc.values, digits=500)
        assert report.upper_holds([2, 3, 4, 5], red.target_index)
        assert abs(report.growth[-1] - 2) <= 0.05


def test_criterion_09_bound_formulas(criterion):
    with criterion(9, "closed-form bound values"):
        start = time.perf_counter()
        assert theoretical_bound("maineffective", H=1, d=2, k=2).value == 268435456
        assert theoretical_bound("ACthm2", d=2, k=2, m=2).value == 20
        rep = theoretical_bound("regularkkernel", k=2, L=1)
        with mpmath.workdps(40):
            assert abs(rep.log10 - 128 * mpmath.log10(39)) < mpmath.mpf(10) ** -10
        assert time.perf_counter() - start < 0.5


def test_criterion_10_difference_matrices(criterion):
    with criterion(10, "difference matrices have rank d - 1 on the Fredholm system"):
        sys = companion_system(fredholm_eq(), budget=64)
        m = difference_spacing(2, 2, 1)
        assert 2 ** m >= 2 ** 2 * 2 ** 7 > 2 ** (m - 1)
        convs = iterate_convergents(sys, hermite_pade(sys), 3 + m, term_cap=1 << 16)
        for n in range(4):
            assert difference_matrix(convs, n, m).rank == 1


@pytest.mark.parametrize("name", ["Fredholm", "Thue-Morse"])
def test_criterion_11_empirical_exponent(criterion, name):
    with criterion(11, f"empirical exponent of the {name} value at 1/2"):
        if name == "Fredholm":
            eq, d, oracle = fredholm_eq(), 2, fredholm_value
            growth = (1, 0, 1)
        else:
            eq, d, oracle = thue_morse_eq(), 1, thue_morse_product
            growth = (1, 0, 1)
        start = time.perf_counter()
        iv = eval_series_real(eq, HALF, 500, growth)
        with mpmath.workdps(520):
            ref = oracle(500)
            assert abs(mpmath.mpf(iv.lower.numerator) / iv.lower.denominator - ref) < mpmath.mpf(10) ** -495
        est = empirical_exponent(iv, max_quotients=200)
        bound = theoretical_bound("maineffective", H=1, d=d, k=2).value
        assert est.certified >= 30
        assert 2 - 1e-3 <= est.estimate <= bound
        assert time.perf_counter() - start < 10


def test_criterion_12_valuation_bound(criterion):
    with criterion(12, "valuation bound on 500 random combinations"):
        sys = companion_system(fredholm_eq(), budget=2100)
        rng = random.Random(12)
        exceeded = 0
        done = 0
        while done < 500:
            c = [random_poly(rng, 4), random_poly(rng, 4)]
            if all(p.is_zero() for p in c):
                continue
            check = valuation_bound_check(sys, c)
            if not check.passed:
                exceeded += 1
            done += 1
        assert exceeded == 0

"""Mahler functional equations and systems.

A scalar equation here is ``p(x) + sum_i a_i(x) F(x^{k^i}) = 0``.  This
module turns equations into first-order matrix systems F(x) = A(x)/B(x) F(x^k),
does arithmetic in the skew ring Q(x)[D] with D q(x) = q(x^k) D, searches
for minimal annihilators, moves the origin so a_0(0) != 0, and removes
zeros of B at the iterates of an evaluation point by differentiating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .algebra import (
    Polynomial,
    TruncatedSeries,
    X,
    equation_residual,
    expand_series,
    poly_gcd,
    poly_lcm,
    to_rational,
)
from .errors import (
    BudgetError,
    ConsistencyError,
    Defect,
    DegenerateInputError,
    DomainError,
    InputError,
    PreconditionError,
)
from .linalg import nullspace
from .polymat import PolyMatrix, RatMatrix

_ZERO = Polynomial.zero()
_ONE = Polynomial.one()


# ---------------------------------------------------------------------------
# equations


@dataclass(frozen=True)
class MahlerEquation:
    """p(x) + sum_{i=0}^d a_i(x) F(x^{k^i}) = 0.

    ``H`` is max(1, deg a_i) and leaves p out; ``H_full`` also counts p.
    An order-0 equation (d = 0) is allowed, it describes a rational F.
    """

    k: int
    a: tuple[Polynomial, ...]
    p: Polynomial = field(default_factory=Polynomial.zero)
    seed: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise InputError("k must be an integer >= 2")
        a = tuple(Polynomial.coerce(c) for c in self.a)
        if not a:
            raise InputError("equation needs at least a_0")
        if a[0].is_zero() or a[-1].is_zero():
            raise InputError("a_0 * a_d != 0 required")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p", Polynomial.coerce(self.p))
        object.__setattr__(self, "seed", tuple(to_rational(c) for c in self.seed))

    @property
    def d(self) -> int:
        return len(self.a) - 1

    @property
    def H(self) -> int:
        return max([1] + [c.deg() for c in self.a])

    @property
    def H_full(self) -> int:
        return max(self.H, self.p.deg())

    def coefficient_height(self) -> Fraction:
        return max(c.height() for c in self.a)

    def residual(self, series: TruncatedSeries) -> TruncatedSeries:
        return equation_residual(self, series)

    def scaled(self, c) -> "MahlerEquation":
        c = to_rational(c)
        return MahlerEquation(self.k, tuple(ai.scale(c) for ai in self.a), self.p.scale(c), self.seed)

    def normalized(self) -> "MahlerEquation":
        """Integer coefficients with content 1 and a_0 positive at its lowest term."""
        polys = list(self.a) + [self.p]
        den = 1
        for q in polys:
            for c in q.coeffs:
                den = den * c.denominator // math.gcd(den, c.denominator)
        g = 0
        for q in polys:
            for c in q.coeffs:
                g = math.gcd(g, int(c * den))
        scale = Fraction(den, g)
        low = self.a[0][int(self.a[0].valuation())]
        if low < 0:
            scale = -scale
        return self.scaled(scale)

    def same_up_to_scalar(self, other: "MahlerEquation") -> bool:
        if self.k != other.k or self.d != other.d:
            return False
        return self.normalized().a == other.normalized().a and self.normalized().p == other.normalized().p

    def to_dict(self) -> dict:
        out = {"k": self.k, "p": self.p.to_strings(), "a": [c.to_strings() for c in self.a]}
        if self.seed:
            out["seed"] = [f"{c.numerator}/{c.denominator}" for c in self.seed]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MahlerEquation":
        return cls(int(data["k"]), tuple(Polynomial.from_strings(c) for c in data["a"]),
                   Polynomial.from_strings(data.get("p", [])), tuple(data.get("seed", ())))

    def __str__(self) -> str:
        terms = [f"({c})*F(x^{self.k ** i})" for i, c in enumerate(self.a) if c]
        lhs = " + ".join(([f"({self.p})"] if self.p else []) + terms)
        return f"{lhs} = 0"


def equation_height(eq: MahlerEquation, series: TruncatedSeries | None = None) -> tuple[Fraction, bool]:
    """h: max of |coefficients of a_i| and |f(0..H)|.

    The flag is False when the series prefix is shorter than H + 1.
    """
    h = eq.coefficient_height()
    complete = True
    if series is not None:
        top = min(eq.H, series.budget)
        complete = series.budget >= eq.H
        h = max([h] + [abs(series[i]) for i in range(top + 1)])
    else:
        complete = False
    return h, complete


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class MahlerSystem:
    """F(x) = A(x)/B(x) F(x^k) with the series prefixes of F_1..F_dim."""

    k: int
    A: RatMatrix
    series: tuple[TruncatedSeries, ...]
    note: str = ""

    def __post_init__(self):
        if self.A.rows != self.A.cols or self.A.rows != len(self.series):
            raise InputError("system matrix and series vector disagree in size")

    @property
    def dim(self) -> int:
        return self.A.rows

    @property
    def B(self) -> Polynomial:
        return self.A.denominator

    @property
    def numerator(self) -> PolyMatrix:
        return self.A.numerator

    @property
    def H(self) -> int:
        return max(1, int(max(self.A.numerator.max_degree(), self.A.denominator.degree, 0)))

    @property
    def budget(self) -> int:
        return min(s.budget for s in self.series)

    def residuals(self) -> list[TruncatedSeries]:
        """B*F_i(x) - sum_j A_ij F_j(x^k) for each row."""
        k = self.k
        shifted = [s.substitute_power(k) for s in self.series]
        out = []
        for i in range(self.dim):
            acc = self.series[i] * self.B
            for j in range(self.dim):
                e = self.numerator[i, j]
                if e:
                    acc = acc - shifted[j].truncate(acc.budget) * e
            out.append(acc)
        return out

    def verify(self) -> int:
        """Check the relation to the series budget; returns the verified order."""
        for i, r in enumerate(self.residuals()):
            v = r.valuation()
            if isinstance(v, int):
                raise Defect(f"system relation fails in row {i} at order {v}")
        return self.budget

    def determinant(self) -> tuple[Polynomial, Polynomial]:
        from .polymat import determinant

        return determinant(self.numerator), self.B ** self.dim


def companion_system(eq: MahlerEquation, budget: int = 64, series: TruncatedSeries | None = None) -> MahlerSystem:
    """(d+1)-dimensional system over (1, F(x), F(x^k), ..., F(x^{k^{d-1}})).

    Row 1 keeps the constant, row 2 solves the equation for F(x), the rest
    shift.  Coefficients are made integral with content 1 and B(0) > 0.
    """
    if eq.a[0][0] == 0:
        raise PreconditionError("a_0(0) = 0: apply normalize_origin first")
    k, d, a0 = eq.k, eq.d, eq.a[0]
    if series is None:
        series = expand_series(eq, budget=budget)
    n = d + 1
    grid = [[_ZERO] * n for _ in range(n)]
    grid[0][0] = a0
    if n > 1:
        grid[1] = [-eq.p] + [-c for c in eq.a[1:]]
        for i in range(2, n):
            grid[i][i - 1] = a0
    A = RatMatrix(PolyMatrix(grid), a0).integer_normalized()
    vec = [TruncatedSeries.from_polynomial(_ONE, series.budget)]
    vec += [series.substitute_power(k ** i).truncate(series.budget) for i in range(d)]
    system = MahlerSystem(k, A, tuple(vec), note="companion")
    system.verify()
    return system


def equation_system(eq: MahlerEquation, budget: int = 64, series: TruncatedSeries | None = None) -> MahlerSystem:
    """d-dimensional homogeneous companion over (F(x), ..., F(x^{k^{d-1}})).

    Needs p = 0; B = a_0 and the first row is (-a_1, ..., -a_d).
    """
    if eq.p:
        raise PreconditionError("equation_system needs a homogeneous equation (p = 0)")
    if eq.d < 1:
        raise PreconditionError("equation_system needs order d >= 1")
    if eq.a[0][0] == 0:
        raise PreconditionError("a_0(0) = 0: apply normalize_origin first")
    k, d = eq.k, eq.d
    if series is None:
        series = expand_series(eq, budget=budget)
    grid = [[_ZERO] * d for _ in range(d)]
    grid[0] = [-c for c in eq.a[1:]]
    for i in range(1, d):
        grid[i][i - 1] = eq.a[0]
    A = RatMatrix(PolyMatrix(grid), eq.a[0]).integer_normalized()
    vec = tuple(series.substitute_power(k ** i).truncate(series.budget) for i in range(d))
    system = MahlerSystem(k, A, vec, note="homogeneous companion")
    system.verify()
    return system


# ---------------------------------------------------------------------------
# skew operators


@dataclass(frozen=True)
class RatFunc:
    """num/den with den monic and gcd(num, den) = 1."""

    num: Polynomial
    den: Polynomial = field(default_factory=Polynomial.one)

    def __post_init__(self):
        num, den = Polynomial.coerce(self.num), Polynomial.coerce(self.den)
        if den.is_zero():
            raise InputError("zero denominator")
        if num.is_zero():
            num, den = _ZERO, _ONE
        else:
            g = poly_gcd(num, den)
            num, den = num.exact_div(g), den.exact_div(g)
            lead = den.leading
            num, den = num.scale(1 / lead), den.scale(1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def coerce(cls, v) -> "RatFunc":
        if isinstance(v, RatFunc):
            return v
        if isinstance(v, tuple):
            return cls(v[0], v[1])
        return cls(Polynomial.coerce(v))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, o: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    def __mul__(self, o: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * o.num, self.den * o.den)

    def substitute_power(self, k: int) -> "RatFunc":
        return RatFunc(self.num.substitute_power(k), self.den.substitute_power(k))

    def __str__(self) -> str:
        return str(self.num) if self.den == _ONE else f"({self.num})/({self.den})"


@dataclass(frozen=True)
class SkewOperator:
    """r_0 + r_1 D + ... + r_s D^s with D q(x) = q(x^k) D."""

    k: int
    coeffs: tuple[RatFunc, ...]

    def __post_init__(self):
        cs = [RatFunc.coerce(c) for c in self.coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_equation(cls, eq: MahlerEquation) -> "SkewOperator":
        return cls(eq.k, tuple(RatFunc(c) for c in eq.a))

    @classmethod
    def delta(cls, k: int, power: int = 1) -> "SkewOperator":
        return cls(k, tuple([RatFunc(_ZERO)] * power + [RatFunc(_ONE)]))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __mul__(self, other: "SkewOperator") -> "SkewOperator":
        return skew_multiply(self, other)

    def __add__(self, other: "SkewOperator") -> "SkewOperator":
        n = max(len(self.coeffs), len(other.coeffs))
        z = RatFunc(_ZERO)
        a = list(self.coeffs) + [z] * (n - len(self.coeffs))
        b = list(other.coeffs) + [z] * (n - len(other.coeffs))
        return SkewOperator(self.k, tuple(x + y for x, y in zip(a, b)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkewOperator):
            return NotImplemented
        return self.k == other.k and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.k, self.coeffs))

    def apply(self, series: TruncatedSeries) -> TruncatedSeries:
        """sum r_j(x) F(x^{k^j}) for polynomial coefficients."""
        out = None
        for j, c in enumerate(self.coeffs):
            if c.den != _ONE:
                raise InputError("apply needs polynomial coefficients")
            term = series.substitute_power(self.k ** j).truncate(series.budget) * c.num
            out = term if out is None else out + term
        return out if out is not None else series * 0

    def __str__(self) -> str:
        parts = [f"({c})D^{j}" for j, c in enumerate(self.coeffs) if not c.is_zero()]
        return " + ".join(parts) or "0"


def skew_multiply(r: SkewOperator, s: SkewOperator) -> SkewOperator:
    """Product in Q(x)[D]: coefficient l is sum_j r_j(x) s_{l-j}(x^{k^j})."""
    if r.k != s.k:
        raise InputError("operators over different k")
    if not r.coeffs or not s.coeffs:
        return SkewOperator(r.k, ())
    k = r.k
    out = [RatFunc(_ZERO)] * (len(r.coeffs) + len(s.coeffs) - 1)
    for j, rj in enumerate(r.coeffs):
        if rj.is_zero():
            continue
        for t, st in enumerate(s.coeffs):
            if st.is_zero():
                continue
            out[j + t] = out[j + t] + rj * st.substitute_power(k ** j)
    return SkewOperator(k, tuple(out))


def compose_equation(op: SkewOperator, eq: MahlerEquation) -> MahlerEquation:
    """Equation for the same F obtained by applying ``op`` on the left.

    p transforms as sum_j r_j(x) p(x^{k^j}); denominators are cleared.
    """
    if op.k != eq.k:
        raise InputError("operator and equation use different k")
    prod = skew_multiply(op, SkewOperator.from_equation(eq))
    p_new = RatFunc(_ZERO)
    for j, rj in enumerate(op.coeffs):
        p_new = p_new + rj * RatFunc(eq.p.substitute_power(eq.k ** j))
    den = p_new.den
    for c in prod.coeffs:
        den = poly_lcm(den, c.den)
    a = tuple(c.num * den.exact_div(c.den) for c in prod.coeffs)
    p = p_new.num * den.exact_div(p_new.den)
    return MahlerEquation(eq.k, a, p, eq.seed)


# ---------------------------------------------------------------------------
# minimal annihilators


def certification_order(k: int, d: int, H: int) -> int:
    """Order beyond which a candidate relation of order <= d with coefficient
    degrees <= H cannot vanish unless it is an identity: 2^{H(d+1)} H k^{2(d+1)+3} + 1."""
    return 2 ** (H * (d + 1)) * H * k ** (2 * (d + 1) + 3) + 1


def _relation_rows(k: int, e: int, deg: int, pdeg: int, f: Sequence[Fraction], orders: range) -> list[list[Fraction]]:
    """Coefficient of x^n in p + sum_{i<=e} a_i F(x^{k^i}) as a linear form
    in (a_0 coeffs, ..., a_e coeffs, p coeffs)."""
    rows = []
    width = (e + 1) * (deg + 1) + pdeg + 1
    for n in orders:
        row = [Fraction(0)] * width
        for i in range(e + 1):
            step = k ** i
            base = i * (deg + 1)
            for j in range(min(deg, n) + 1):
                m = n - j
                if m % step == 0:
                    row[base + j] = f[m // step]
        if n <= pdeg:
            row[(e + 1) * (deg + 1) + n] = Fraction(1)
        rows.append(row)
    return rows


def _first_failure(eq: MahlerEquation, f: Sequence[Fraction], upto: int) -> int | None:
    """First order <= upto where the equation fails on coefficients f."""
    k = eq.k
    powers = [k ** i for i in range(len(eq.a))]
    for n in range(upto + 1):
        acc = eq.p[n]
        for i, ai in enumerate(eq.a):
            step = powers[i]
            for j, c in enumerate(ai.coeffs):
                if c and j <= n and (n - j) % step == 0:
                    acc += c * f[(n - j) // step]
        if acc:
            return n
    return None


def minimal_annihilator(eq: MahlerEquation, series: TruncatedSeries) -> MahlerEquation:
    """Least-order equation annihilating F with coefficient degrees <= H_full.

    Orders e = 0, 1, ... and degree caps 0..H_full are tried in turn; the
    first reduced-echelon solution with a_0 a_e != 0 is certified to the
    order returned by ``certification_order``.
    """
    H, d, k = eq.H_full, eq.d, eq.k
    cert = certification_order(k, d, H)
    if series.budget < cert:
        raise BudgetError(f"series budget {series.budget} is below the certification order {cert}", required=cert)
    f = series.coeffs
    fails = _first_failure(eq, f, cert)
    if fails is not None:
        raise ConsistencyError(f"series does not satisfy the input equation at order {fails}", order=fails)
    for e in range(d + 1):
        for deg in range(H + 1):
            width = (e + 1) * (deg + 1) + H + 1
            n_rows = 2 * width + k ** e * (deg + 1) + 8
            while True:
                rows = _relation_rows(k, e, deg, H, f, range(min(n_rows, cert) + 1))
                candidate = None
                for v in nullspace(rows, width):
                    a = [Polynomial(v[i * (deg + 1):(i + 1) * (deg + 1)]) for i in range(e + 1)]
                    if a[0].is_zero() or a[-1].is_zero():
                        continue
                    candidate = MahlerEquation(k, tuple(a), Polynomial(v[(e + 1) * (deg + 1):]), eq.seed)
                    break
                if candidate is None:
                    break
                bad = _first_failure(candidate, f, cert)
                if bad is None:
                    return candidate.normalized()
                if n_rows >= cert:
                    raise Defect("candidate passed the full system but fails certification")
                n_rows = min(cert, max(2 * n_rows, bad + 1))
    raise Defect("no annihilator found within the degree box, although the input is one")


# ---------------------------------------------------------------------------
# origin normalization


@dataclass(frozen=True)
class NormalizedEquation:
    """F = P + x^M E with E(0) != 0 and sum_i b_i E(x^{k^i}) = 0, b_0(0) != 0."""

    delta: int
    P: Polynomial
    M: int
    Q: Polynomial
    c: tuple[Polynomial, ...]
    R: Polynomial
    tail: MahlerEquation
    E: TruncatedSeries
    checks: dict

    @property
    def b(self) -> tuple[Polynomial, ...]:
        return self.tail.a


def normalize_origin(eq: MahlerEquation, series: TruncatedSeries) -> NormalizedEquation:
    """Rewrite F = P + x^M E so that E satisfies an equation with b_0(0) != 0.

    Q = p + sum a_i P(x^{k^i}) includes the inhomogeneous part.  When Q = 0
    the shifted equation is already homogeneous and is returned as the tail.
    """
    k, d, H = eq.k, eq.d, eq.H
    delta = int(eq.a[0].valuation())
    budget = series.budget
    if budget <= delta:
        raise BudgetError("series prefix shorter than the origin order", required=delta + 1)
    P = Polynomial(series.coeffs[: delta + 1])
    rest = series - P
    v = rest.valuation()
    if not isinstance(v, int):
        raise DegenerateInputError("series matches a polynomial through its budget; F(a/b) is rational")
    M = v
    horizon = max(H + k ** d * delta, eq.p.deg())
    if all(c == 0 for c in series.coeffs[horizon + 1:]):
        raise DegenerateInputError(
            f"no nonzero coefficient beyond degree {horizon} in the prefix; F looks like a polynomial")
    E = TruncatedSeries._raw(list(rest.coeffs[M:]), budget - M)
    Q = eq.p
    for i, ai in enumerate(eq.a):
        Q = Q + ai * P.substitute_power(k ** i)
    c = tuple(ai.shift(k ** i * M - M - delta) for i, ai in enumerate(eq.a))
    R = -Q.shift(-M - delta)
    if (-R).shift(M + delta) != Q:
        raise Defect("Q is not divisible by x^(M+delta)")
    if R.is_zero():
        tail = MahlerEquation(k, c)
    else:
        b = []
        for i in range(d + 2):
            term = c[i] * R.substitute_power(k) if i <= d else _ZERO
            if i >= 1:
                term = term - c[i - 1].substitute_power(k) * R
            b.append(term)
        tail = MahlerEquation(k, tuple(b))
    b0 = tail.a[0]
    if b0[0] == 0:
        raise Defect("b_0(0) = 0 after origin normalization")
    resid = tail.residual(E).valuation()
    if isinstance(resid, int):
        raise Defect(f"tail equation fails at order {resid}")
    deg_bound = (H + k ** d) ** 2 * (k + 1)
    h = eq.coefficient_height()
    fmax = max(abs(series[i]) for i in range(delta + 1))
    # |lc(b_0)| <= |lc(a_0)| |lc(Q)|, and p adds at most its height to lc(Q)
    lead_bound = h * (eq.p.height() + (d + 1) * h * (delta + 1) * fmax)
    m_bound = max(H + k ** d * delta, eq.p.deg())
    checks = {
        "M_bound": m_bound,
        "M_ok": M <= m_bound,
        "degree_bound": deg_bound,
        "degree_ok": all(bi.deg() <= deg_bound for bi in tail.a),
        "leading_bound": lead_bound,
        "leading_ok": abs(b0.leading) <= lead_bound,
        "verified_to": E.budget,
    }
    return NormalizedEquation(delta, P, M, Q, c, R, tail, E, checks)


# ---------------------------------------------------------------------------
# Dumas split and Mahler's condition


def dumas_split(B: Polynomial) -> tuple[Fraction, int, Polynomial]:
    """B = alpha x^delta beta(x) with beta(0) = 1."""
    B = Polynomial.coerce(B)
    if B.is_zero():
        raise InputError("dumas_split needs a nonzero polynomial")
    delta = int(B.valuation())
    alpha = B[delta]
    beta = B.shift(-delta).scale(1 / alpha)
    return alpha, delta, beta


def _integer_leading(B: Polynomial) -> int:
    _, prim = B.primitive()
    return abs(int(prim.leading))


@dataclass(frozen=True)
class ConditionScan:
    horizon: int
    certified_horizon: int
    zeros: tuple[tuple[int, int], ...]
    bound: int

    @property
    def effective_horizon(self) -> int:
        return max(self.horizon, self.certified_horizon)


def scan_horizon(b: int, k: int, d: int, H: int, h) -> int:
    """Least N >= 1 with k^{N-1} <= max(1, log C / log b) < k^N, C = (d+1)(H+1)h^3."""
    bound = (d + 1) * (H + 1) * math.ceil(Fraction(h) ** 3)
    N = 1
    while b ** (k ** N) <= bound:
        N += 1
    return N


def mahler_condition_scan(B: Polynomial, a: int, b: int, k: int, context: tuple[int, int, int]) -> ConditionScan:
    """Find n with B((a/b)^{k^n}) = 0 and their multiplicities.

    ``horizon`` follows the displayed inequality for (d, H, h); the
    ``certified_horizon`` is the least n with b^{k^n} > |lc(B)| (integer
    primitive B), past which the rational-root argument excludes zeros.
    Both ranges are scanned exactly.
    """
    if b < 2 or math.gcd(a, b) != 1:
        raise InputError("need b >= 2 and gcd(a, b) = 1")
    d, H, h = context
    N = scan_horizon(b, k, d, H, h)
    lc = _integer_leading(Polynomial.coerce(B)) if not Polynomial.coerce(B).is_zero() else 0
    cert = 0
    while b ** (k ** cert) <= lc:
        cert += 1
    zeros = []
    t = Fraction(a, b)
    for n in range(max(N, cert)):
        mult = Polynomial.coerce(B).multiplicity_at(t ** (k ** n))
        if mult:
            zeros.append((n, mult))
    return ConditionScan(N, cert, tuple(zeros), (d + 1) * (H + 1) * math.ceil(Fraction(h) ** 3))


# ---------------------------------------------------------------------------
# derivative augmentation and singularity removal


def derivative_augment(sys: MahlerSystem, s: int) -> MahlerSystem:
    """System over (G, G', ..., G^{(s)}) from G(x) = A(x)/B(x) G(x^k).

    Block (j, i) is c_{j,i} with c_{0,0} = A/B and
    c_{j,i} = c_{j-1,i}' + k x^{k-1} c_{j-1,i-1}; diagonal blocks are
    k^j x^{j(k-1)} A/B.
    """
    if s < 0:
        raise InputError("s must be >= 0")
    if s == 0:
        return sys
    k, n = sys.k, sys.dim
    B = sys.B
    num = sys.numerator
    xk = X ** (k - 1) * k
    const = B.is_constant()
    blocks: dict[tuple[int, int], PolyMatrix] = {(0, 0): num}
    for j in range(1, s + 1):
        for i in range(j + 1):
            prev = blocks.get((j - 1, i))
            left = blocks.get((j - 1, i - 1))
            acc = PolyMatrix.zeros(n, n)
            if const:
                if prev is not None:
                    acc = acc + prev.derivative()
                if left is not None:
                    acc = acc + left.scale(xk)
            else:
                if prev is not None:
                    acc = acc + prev.derivative().scale(B) - prev.scale(B.derivative() * j)
                if left is not None:
                    acc = acc + left.scale(xk * B)
            blocks[(j, i)] = acc
    size = n * (s + 1)
    grid = [[_ZERO] * size for _ in range(size)]
    for (j, i), blk in blocks.items():
        factor = _ONE if const else B ** (s - j)
        for r in range(n):
            for c in range(n):
                grid[j * n + r][i * n + c] = blk[r, c] * factor
    den = B if const else B ** (s + 1)
    vec = []
    for j in range(s + 1):
        for ser in sys.series:
            dser = ser
            for _ in range(j):
                dser = dser.derivative()
            vec.append(dser)
    out = MahlerSystem(k, RatMatrix(PolyMatrix(grid), den), tuple(vec), note=f"derivatives to order {s}")
    if const:
        bound = s * (k - 1) + sys.H
        assert out.numerator.max_degree() <= bound, "augmented entries exceed s(k-1) + H"
    return out


@dataclass(frozen=True)
class SingularityResolution:
    scan: ConditionScan
    N: int
    zero_orders: tuple[int, ...]
    s: int
    alpha: Fraction
    delta: int
    beta: Polynomial
    T: Polynomial
    system: MahlerSystem
    target_index: int
    correction: Fraction
    trivial: bool
    identity_check: dict


def _product_series(beta: Polynomial, k: int, start: int, budget: int) -> TruncatedSeries:
    """prod_{n >= start} beta(x^{k^n}) through order ``budget``."""
    out = TruncatedSeries._raw([Fraction(1)], budget)
    n = start
    while k ** n <= budget:
        out = out * beta.substitute_power(k ** n)
        n += 1
    return out


def _evaluate_system_vector(sys: MahlerSystem, t: Fraction, digits: int) -> list:
    """Numeric value of the series vector at t by iterating the relation
    towards 0 and summing the prefixes there."""
    k = sys.k
    points = [t]
    while abs(points[-1]) > Fraction(1, 2 ** 60) and len(points) < 64:
        points.append(points[-1] ** k)
    tail_pt = points[-1]
    values = [mpmath.mpf(0)] * sys.dim
    for i, ser in enumerate(sys.series):
        acc = Fraction(0)
        for n in range(min(ser.budget, 400), -1, -1):
            acc = acc * tail_pt + ser.coeffs[n]
        values[i] = mpmath.mpf(acc.numerator) / acc.denominator
    for pt in reversed(points[:-1]):
        mat = sys.A.evaluate(pt)
        values = [mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * v for c, v in zip(row, values))
                  for row in mat]
    return values


def _series_value(ser: TruncatedSeries, t: Fraction, digits: int):
    acc = Fraction(0)
    for c in reversed(ser.coeffs):
        acc = acc * t + c
    return mpmath.mpf(acc.numerator) / acc.denominator


def resolve_singularity(sys: MahlerSystem, a: int, b: int, context: tuple | None = None,
                        digits: int = 50) -> SingularityResolution:
    """Remove the zeros of B at a/b, (a/b)^k, ... by differentiating.

    Returns the system for L = G_s / prod_{n>=N} beta(x^{k^n}) with the
    constant function adjoined first, and checks
    E(a/b) * s! * T(a/b) = L_{1,s}(a/b) numerically.
    """
    if b < 2 or math.gcd(a, b) != 1:
        raise InputError("need b >= 2 and gcd(a, b) = 1")
    if abs(a) >= b:
        raise DomainError("a/b must lie inside the unit disc")
    k, n = sys.k, sys.dim
    t = Fraction(a, b)
    alpha, delta, beta = dumas_split(sys.B)
    if delta:
        raise PreconditionError("B(0) = 0; normalize the origin first")
    if context is None:
        norm = sys.A.integer_normalized()
        h = max([c.height() for r in norm.numerator.entries for c in r]
                + [norm.denominator.height()]
                + [abs(c) for c in sys.series[0].coeffs[: sys.H + 1]])
        context = (max(n - 1, 1), sys.H, h)
    scan = mahler_condition_scan(beta, a, b, k, context)
    N = scan.effective_horizon
    orders = tuple(beta.multiplicity_at(t ** (k ** i)) for i in range(N))
    s = sum(orders)
    prod = _ONE
    for i in range(N):
        prod = prod * beta.substitute_power(k ** i)
    root = Polynomial([-t, 1])
    if s != prod.multiplicity_at(t):
        raise Defect("zero order of the product disagrees with the scan")
    T = prod.exact_div(root ** s)
    correction = math.factorial(s) * T(t)
    if s == 0:
        return SingularityResolution(scan, N, orders, 0, alpha, delta, beta, T, sys, 0, correction, True, {})
    budget = sys.budget
    pi0 = _product_series(beta, k, 0, budget)
    g_series = tuple(ser * pi0 for ser in sys.series)
    g_sys = MahlerSystem(k, RatMatrix(sys.numerator, Polynomial.constant(alpha)), g_series, note="G system")
    g_sys.verify()
    aug = derivative_augment(g_sys, s)
    piN = _product_series(beta, k, N, budget)
    inv = piN.inverse()
    l_series = [ser * inv for ser in aug.series]
    betaN = beta.substitute_power(k ** N)
    den = aug.B * betaN
    size = aug.dim + 1
    grid = [[_ZERO] * size for _ in range(size)]
    grid[0][0] = den
    for i in range(aug.dim):
        for j in range(aug.dim):
            grid[i + 1][j + 1] = aug.numerator[i, j]
    one = TruncatedSeries._raw([Fraction(1)], min(x.budget for x in l_series))
    l_sys = MahlerSystem(k, RatMatrix(PolyMatrix(grid), den).integer_normalized(), (one, *l_series),
                         note=f"singularity removed at {t}")
    l_sys.verify()
    target = 1 + s * n
    with mpmath.workdps(digits + 20):
        value_l = _evaluate_system_vector(l_sys, t, digits)[target]
        value_e = _series_value(sys.series[0], t, digits)
        corr = mpmath.mpf(correction.numerator) / correction.denominator
        diff = abs(value_e * corr - value_l)
        scale = max(abs(value_l), mpmath.mpf(1))
        ok = diff <= scale * mpmath.mpf(10) ** (-digits)
        check = {
            "lhs": mpmath.nstr(value_e * corr, digits),
            "rhs": mpmath.nstr(value_l, digits),
            "difference": mpmath.nstr(diff, 5),
            "digits": digits,
            "pass": bool(ok),
        }
    return SingularityResolution(scan, N, orders, s, alpha, delta, beta, T, l_sys, target, correction, False, check)

"""Exact univariate polynomials and truncated power series over the rationals.

Everything here is exact (``fractions.Fraction``).  Besides the ring
operations we provide the substitution x -> x^k, the Cartier operators,
valuations, coefficient expansion of Mahler equations and rigorous real
evaluation of series at rational points.

Intervals are stored with dyadic rational endpoints (denominators are powers
of two), i.e. arbitrary precision binary floating values kept as Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import BudgetError, ConsistencyError, DomainError, InputError, PreconditionError

RationalLike = Union[int, Fraction, str]

# Below this length, schoolbook multiplication beats Kronecker packing.
_KRONECKER_MIN = 24


def to_rational(value) -> Fraction:
    """Convert int, Fraction or an "a/b" string to a Fraction (floats refused)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                den_i = int(den)
                if den_i == 0:
                    raise InputError(f"zero denominator in {value!r}")
                return Fraction(int(num), den_i)
            return Fraction(int(text))
        except ValueError as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not an exact rational: {value!r}")


def rational_str(q: Fraction) -> str:
    """Canonical "num/den" rendering."""
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# integer coefficient-list kernels


def _common_denominator(cs: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for c in cs:
        if c.denominator != 1:
            den = den * c.denominator // math.gcd(den, c.denominator)
    return [c.numerator * (den // c.denominator) for c in cs], den


def _schoolbook(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _kronecker_unsigned(a: Sequence[int], b: Sequence[int]) -> list[int]:
    n_out = len(a) + len(b) - 1
    top_a, top_b = max(a), max(b)
    if top_a == 0 or top_b == 0:
        return [0] * n_out
    bits = top_a.bit_length() + top_b.bit_length() + min(len(a), len(b)).bit_length() + 1
    width = (bits + 7) // 8
    pa = int.from_bytes(b"".join(x.to_bytes(width, "little") for x in a), "little")
    pb = int.from_bytes(b"".join(x.to_bytes(width, "little") for x in b), "little")
    raw = (pa * pb).to_bytes(width * n_out, "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(n_out)]


def int_poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of integer coefficient lists (ascending exponents)."""
    if not a or not b:
        return []
    if min(len(a), len(b)) < _KRONECKER_MIN:
        return _schoolbook(a, b)
    a_pos = [x if x > 0 else 0 for x in a]
    a_neg = [-x if x < 0 else 0 for x in a]
    b_pos = [x if x > 0 else 0 for x in b]
    b_neg = [-x if x < 0 else 0 for x in b]
    out = [0] * (len(a) + len(b) - 1)
    for left, right, sign in ((a_pos, b_pos, 1), (a_neg, b_neg, 1), (a_pos, b_neg, -1), (a_neg, b_pos, -1)):
        if any(left) and any(right):
            for i, v in enumerate(_kronecker_unsigned(left, right)):
                if v:
                    out[i] += sign * v
    return out


def _frac_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    ia, da = _common_denominator(a)
    ib, db = _common_denominator(b)
    den = da * db
    return [Fraction(v, den) if v else Fraction(0) for v in int_poly_mul(ia, ib)]


def _strip(cs: list[Fraction]) -> list[Fraction]:
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


# ---------------------------------------------------------------------------
# polynomials


class Polynomial:
    """Immutable polynomial with exact rational coefficients (index = exponent)."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable[RationalLike] = ()):
        self.coeffs: tuple[Fraction, ...] = tuple(_strip([to_rational(c) for c in coeffs]))
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: list[Fraction]) -> "Polynomial":
        obj = cls.__new__(cls)
        obj.coeffs = tuple(_strip(coeffs))
        obj._hash = None
        return obj

    # constructors
    @classmethod
    def zero(cls) -> "Polynomial":
        return cls._raw([])

    @classmethod
    def one(cls) -> "Polynomial":
        return cls._raw([Fraction(1)])

    @classmethod
    def x(cls) -> "Polynomial":
        return cls._raw([Fraction(0), Fraction(1)])

    @classmethod
    def constant(cls, c: RationalLike) -> "Polynomial":
        return cls._raw([to_rational(c)])

    @classmethod
    def monomial(cls, c: RationalLike, n: int) -> "Polynomial":
        return cls._raw([Fraction(0)] * n + [to_rational(c)])

    @classmethod
    def coerce(cls, value) -> "Polynomial":
        if isinstance(value, Polynomial):
            return value
        if isinstance(value, (list, tuple)):
            return cls(value)
        return cls.constant(value)

    # basic data
    @property
    def degree(self) -> float | int:
        """Degree; the zero polynomial has degree ``-math.inf``."""
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    def deg(self) -> int:
        """Degree with the zero polynomial mapped to -1 (handy for ranges)."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n] if 0 <= n < len(self.coeffs) else Fraction(0)

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def valuation(self) -> float | int:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return math.inf

    def height(self) -> Fraction:
        """Maximum absolute value of the coefficients."""
        return max((abs(c) for c in self.coeffs), default=Fraction(0))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    # equality and hashing
    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Polynomial.constant(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    # arithmetic
    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw([-c for c in self.coeffs])

    def __sub__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return Polynomial._raw(_frac_mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise InputError("negative power of a polynomial")
        result, base = Polynomial.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: RationalLike) -> "Polynomial":
        c = to_rational(c)
        if c == 0:
            return Polynomial.zero()
        return Polynomial._raw([c * v for v in self.coeffs])

    def shift(self, n: int) -> "Polynomial":
        """Multiply by x^n (n may be negative if the low terms vanish)."""
        if not self.coeffs:
            return self
        if n >= 0:
            return Polynomial._raw([Fraction(0)] * n + list(self.coeffs))
        if any(self.coeffs[:-n]):
            raise InputError(f"cannot divide by x^{-n}: valuation too small")
        return Polynomial._raw(list(self.coeffs[-n:]))

    def truncate(self, n: int) -> "Polynomial":
        """Keep terms of degree <= n."""
        return Polynomial._raw(list(self.coeffs[: n + 1]))

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.deg()
        lead = other.leading
        if len(rem) - 1 < dq:
            return Polynomial.zero(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        for shift in range(len(rem) - 1 - dq, -1, -1):
            c = rem[shift + dq] / lead
            if c:
                quot[shift] = c
                for j, v in enumerate(other.coeffs):
                    rem[shift + j] -= c * v
        return Polynomial._raw(quot), Polynomial._raw(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[0]

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[1]

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        q, r = self.divmod(other)
        if r:
            raise InputError("polynomial division is not exact")
        return q

    def divides(self, other: "Polynomial") -> bool:
        """True when self | other."""
        if self.is_zero():
            return other.is_zero()
        return other.divmod(self)[1].is_zero()

    def monic(self) -> "Polynomial":
        if not self.coeffs:
            return self
        return self.scale(1 / self.leading)

    def primitive(self) -> tuple[Fraction, "Polynomial"]:
        """Return (c, P) with self = c*P, P integral with content 1 and positive lead."""
        if not self.coeffs:
            return Fraction(0), self
        ints, den = _common_denominator(self.coeffs)
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        if ints[-1] < 0:
            g = -g
        return Fraction(g, den), Polynomial._raw([Fraction(v // g) for v in ints])

    def derivative(self) -> "Polynomial":
        return Polynomial._raw([i * c for i, c in enumerate(self.coeffs)][1:])

    def substitute_power(self, k: int) -> "Polynomial":
        return substitute_power(self, k)

    def cartier(self, k: int, i: int) -> "Polynomial":
        return cartier(self, k, i)

    # evaluation
    def __call__(self, t) -> Fraction:
        t = to_rational(t)
        if not self.coeffs:
            return Fraction(0)
        nums, den = _common_denominator(self.coeffs)
        a, b = t.numerator, t.denominator
        acc, bpow = 0, 1
        for c in reversed(nums):
            acc = acc * a + c * bpow
            bpow *= b
        return Fraction(acc, den * (bpow // b))

    def multiplicity_at(self, r: RationalLike) -> int:
        """Order of vanishing at the rational point r (exact repeated division)."""
        if self.is_zero():
            raise InputError("multiplicity of a root of the zero polynomial")
        r = to_rational(r)
        lin = Polynomial._raw([-r, Fraction(1)])
        s, cur = 0, self
        while cur(r) == 0:
            cur = cur.exact_div(lin)
            s += 1
        return s

    # serialization / display
    def to_strings(self) -> list[str]:
        return [rational_str(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, items: Iterable[RationalLike]) -> "Polynomial":
        return cls(items)

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = abs(c)
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _as_poly(value) -> Polynomial | None:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction)):
        return Polynomial.constant(value)
    return None


X = Polynomial.x()


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd (zero if both inputs are zero)."""
    while b:
        a, b = b, a % b
    return a.monic()


def poly_lcm(a: Polynomial, b: Polynomial) -> Polynomial:
    if a.is_zero() or b.is_zero():
        return Polynomial.zero()
    return (a * b).exact_div(poly_gcd(a, b)).monic()


def extended_gcd(a: Polynomial, b: Polynomial) -> tuple[Polynomial, Polynomial, Polynomial]:
    """Return (g, s, t) with s*a + t*b = g, g monic (or zero)."""
    r0, r1 = a, b
    s0, s1 = Polynomial.one(), Polynomial.zero()
    t0, t1 = Polynomial.zero(), Polynomial.one()
    while r1:
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    inv = 1 / r0.leading
    return r0.scale(inv), s0.scale(inv), t0.scale(inv)


# ---------------------------------------------------------------------------
# truncated series


@dataclass(frozen=True)
class AtLeast:
    """Valuation lower bound for a series that is zero through its budget."""

    bound: int

    def __str__(self) -> str:
        return f">= {self.bound}"


class TruncatedSeries:
    """Power series known through order ``budget`` (coefficients 0..budget).

    Budget propagation: sums and products take the minimum budget; products
    with an exact polynomial keep the series budget; ``substitute_power``
    gives k*N + k - 1; ``cartier`` gives floor((N - i)/k); ``derivative``
    gives N - 1.
    """

    __slots__ = ("coeffs", "budget")

    def __init__(self, coeffs: Iterable[RationalLike], budget: int | None = None):
        cs = [to_rational(c) for c in coeffs]
        if budget is None:
            budget = len(cs) - 1
        if budget < -1:
            raise InputError("series budget must be >= -1")
        if len(cs) < budget + 1:
            cs.extend([Fraction(0)] * (budget + 1 - len(cs)))
        self.coeffs: tuple[Fraction, ...] = tuple(cs[: budget + 1])
        self.budget = budget

    @classmethod
    def _raw(cls, coeffs: list[Fraction], budget: int) -> "TruncatedSeries":
        obj = cls.__new__(cls)
        if len(coeffs) < budget + 1:
            coeffs = coeffs + [Fraction(0)] * (budget + 1 - len(coeffs))
        obj.coeffs = tuple(coeffs[: budget + 1])
        obj.budget = budget
        return obj

    @classmethod
    def from_polynomial(cls, p: Polynomial, budget: int) -> "TruncatedSeries":
        return cls._raw(list(p.coeffs), budget)

    def coefficient(self, n: int) -> Fraction:
        if n < 0:
            return Fraction(0)
        if n > self.budget:
            raise BudgetError(f"coefficient {n} beyond budget {self.budget}", required=n)
        return self.coeffs[n]

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficient(n)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.budget == other.budget and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.coeffs, self.budget))

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self.coeffs[:8])
        more = ", ..." if len(self.coeffs) > 8 else ""
        return f"TruncatedSeries([{head}{more}], budget={self.budget})"

    def truncate(self, n: int) -> "TruncatedSeries":
        n = min(n, self.budget)
        return TruncatedSeries._raw(list(self.coeffs[: n + 1]), n)

    def to_polynomial(self) -> Polynomial:
        return Polynomial._raw(list(self.coeffs))

    def is_zero_to_budget(self) -> bool:
        return not any(self.coeffs)

    def valuation(self) -> int | AtLeast:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return AtLeast(self.budget + 1)

    # arithmetic
    def _coerce(self, other) -> "TruncatedSeries | None":
        if isinstance(other, TruncatedSeries):
            return other
        if isinstance(other, Polynomial):
            return TruncatedSeries.from_polynomial(other, self.budget)
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries._raw([Fraction(other)], self.budget)
        return None

    def __add__(self, other) -> "TruncatedSeries":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = min(self.budget, o.budget)
        return TruncatedSeries._raw([x + y for x, y in zip(self.coeffs[: n + 1], o.coeffs[: n + 1])], n)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._raw([-c for c in self.coeffs], self.budget)

    def __sub__(self, other) -> "TruncatedSeries":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "TruncatedSeries":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries._raw([c * other for c in self.coeffs], self.budget)
        if isinstance(other, Polynomial):
            n = self.budget
            prod = _frac_mul(list(self.coeffs), list(other.coeffs[: n + 1]))
            return TruncatedSeries._raw(prod[: n + 1], n)
        if isinstance(other, TruncatedSeries):
            n = min(self.budget, other.budget)
            prod = _frac_mul(list(self.coeffs[: n + 1]), list(other.coeffs[: n + 1]))
            return TruncatedSeries._raw(prod[: n + 1], n)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse (requires a nonzero constant term)."""
        if self.budget < 0 or self.coeffs[0] == 0:
            raise InputError("series inverse needs a nonzero constant term")
        n = self.budget
        c0 = self.coeffs[0]
        out = [1 / c0]
        for m in range(1, n + 1):
            acc = Fraction(0)
            for j in range(1, m + 1):
                if self.coeffs[j]:
                    acc += self.coeffs[j] * out[m - j]
            out.append(-acc / c0)
        return TruncatedSeries._raw(out, n)

    def derivative(self) -> "TruncatedSeries":
        return TruncatedSeries._raw([i * c for i, c in enumerate(self.coeffs)][1:], self.budget - 1)

    def substitute_power(self, k: int) -> "TruncatedSeries":
        return substitute_power(self, k)

    def cartier(self, k: int, i: int) -> "TruncatedSeries":
        return cartier(self, k, i)

    def evaluate_prefix(self, t) -> Fraction:
        """Exact partial sum of the known coefficients at t."""
        return Polynomial._raw(list(self.coeffs))(t)

    def to_strings(self) -> list[str]:
        return [rational_str(c) for c in self.coeffs]


# ---------------------------------------------------------------------------
# substitution, Cartier, valuation


def substitute_power(p, k: int):
    """Return p(x^k) for a Polynomial or TruncatedSeries."""
    if k < 1:
        raise InputError("substitution exponent must be >= 1")
    if isinstance(p, Polynomial):
        if not p.coeffs or k == 1:
            return p
        out = [Fraction(0)] * (k * (len(p.coeffs) - 1) + 1)
        out[::k] = p.coeffs
        return Polynomial._raw(out)
    if isinstance(p, TruncatedSeries):
        n = k * p.budget + k - 1
        out = [Fraction(0)] * (n + 1)
        out[: k * p.budget + 1: k] = p.coeffs
        return TruncatedSeries._raw(out, n)
    raise InputError(f"cannot substitute into {type(p).__name__}")


def cartier(s, k: int, i: int):
    """Cartier operator: sum c_n x^n -> sum c_{kn+i} x^n."""
    if k < 1 or not 0 <= i < k:
        raise InputError(f"Cartier index {i} out of range for k = {k}")
    if isinstance(s, Polynomial):
        return Polynomial._raw(list(s.coeffs[i::k]))
    if isinstance(s, TruncatedSeries):
        budget = (s.budget - i) // k
        return TruncatedSeries._raw(list(s.coeffs[i::k]), budget)
    raise InputError(f"cannot apply Cartier operator to {type(s).__name__}")


def valuation(s) -> int | float | AtLeast:
    """Order of vanishing at 0: int, ``math.inf`` for the zero polynomial,
    or ``AtLeast(budget+1)`` for a series that is zero through its budget."""
    return s.valuation()


# ---------------------------------------------------------------------------
# Mahler equation coefficient recurrence


def _equation_parts(eq) -> tuple[int, Polynomial, list[Polynomial]]:
    return eq.k, Polynomial.coerce(eq.p), [Polynomial.coerce(a) for a in eq.a]


def _solve_coefficients(k: int, p: Polynomial, a: list[Polynomial], seed: Sequence[Fraction],
                        budget: int, shift: int) -> list[Fraction]:
    """Solve p + sum a_i F(x^{k^i}) = 0 order by order.

    The order-n equation is linear in f(n - shift), shift = valuation of a_0;
    seeded coefficients are checked against every order that involves them.
    """
    f = [to_rational(c) for c in seed]
    powers = [k ** i for i in range(len(a))]
    last_order = max(budget, len(f) - 1) + shift
    for n in range(last_order + 1):
        unknown = n - shift
        coef = Fraction(0)
        rest = p[n]
        missing = None
        for i, ai in enumerate(a):
            step = powers[i]
            for j, c in enumerate(ai.coeffs):
                if not c or j > n:
                    continue
                m = n - j
                if m % step:
                    continue
                idx = m // step
                if idx == unknown:
                    coef += c
                elif idx < len(f):
                    rest += c * f[idx]
                else:
                    missing = idx
        if missing is not None:
            raise PreconditionError(
                f"order {n} of the equation involves f({missing}); supply a longer seed")
        if unknown < 0:
            if rest != 0:
                raise ConsistencyError(f"equation fails at order {n}", order=n)
            continue
        if unknown < len(f):
            if coef * f[unknown] + rest != 0:
                raise ConsistencyError(f"seed inconsistent with the equation at order {n}", order=n)
            continue
        if coef == 0:
            if rest != 0:
                raise ConsistencyError(f"equation has no solution at order {n}", order=n)
            raise PreconditionError(
                f"f({unknown}) is not determined by the equation (order {n} is degenerate); "
                f"supply a seed of length {unknown + 1}")
        f.append(-rest / coef)
    return f[: budget + 1]


def expand_series(eq, seed: Sequence[RationalLike] | None = None, budget: int = 64) -> TruncatedSeries:
    """Coefficients f(0..budget) of the power-series solution of ``eq``.

    ``eq`` needs attributes ``k``, ``p`` and ``a`` (list a_0..a_d); the
    seed defaults to ``eq.seed`` when present.  Requires a_0(0) != 0.
    """
    k, p, a = _equation_parts(eq)
    if a[0][0] == 0:
        raise PreconditionError("a_0(0) = 0: normalize the equation first with normalize_origin")
    if seed is None:
        seed = getattr(eq, "seed", None) or ()
    if budget < 0:
        raise InputError("budget must be >= 0")
    return TruncatedSeries._raw(_solve_coefficients(k, p, a, seed, budget, 0), budget)


def expand_series_general(eq, seed: Sequence[RationalLike] | None = None, budget: int = 64) -> TruncatedSeries:
    """Like ``expand_series`` but allows a_0(0) = 0.

    The order-n equation then determines f(n - v) with v = valuation(a_0);
    whatever it leaves undetermined has to come from the seed.
    """
    k, p, a = _equation_parts(eq)
    shift = a[0].valuation()
    if shift == math.inf:
        raise PreconditionError("a_0 must be nonzero")
    if seed is None:
        seed = getattr(eq, "seed", None) or ()
    return TruncatedSeries._raw(_solve_coefficients(k, p, a, seed, budget, int(shift)), budget)


def equation_residual(eq, series: TruncatedSeries) -> TruncatedSeries:
    """p + sum a_i F(x^{k^i}) as a series with the budget of ``series``."""
    k, p, a = _equation_parts(eq)
    n = series.budget
    total = TruncatedSeries.from_polynomial(p, n)
    for i, ai in enumerate(a):
        total = total + (substitute_power(series, k ** i).truncate(n) * ai)
    return total


# ---------------------------------------------------------------------------
# rigorous real evaluation


@dataclass(frozen=True)
class RealInterval:
    """Closed interval [lower, upper] with exact (dyadic) rational endpoints."""

    lower: Fraction
    upper: Fraction
    rigorous: bool = True
    note: str = ""

    def __post_init__(self):
        if self.lower > self.upper:
            raise InputError("interval lower bound exceeds upper bound")

    @classmethod
    def exact(cls, value: RationalLike, note: str = "") -> "RealInterval":
        v = to_rational(value)
        return cls(v, v, True, note)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, value) -> bool:
        v = value if isinstance(value, Fraction) else to_rational(value)
        return self.lower <= v <= self.upper

    def contains_interval(self, other: "RealInterval") -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def _combine(self, other, lo, hi) -> "RealInterval":
        rig = self.rigorous and (other.rigorous if isinstance(other, RealInterval) else True)
        return RealInterval(lo, hi, rig, self.note)

    def __add__(self, other) -> "RealInterval":
        if isinstance(other, RealInterval):
            return self._combine(other, self.lower + other.lower, self.upper + other.upper)
        o = to_rational(other)
        return self._combine(o, self.lower + o, self.upper + o)

    __radd__ = __add__

    def __neg__(self) -> "RealInterval":
        return RealInterval(-self.upper, -self.lower, self.rigorous, self.note)

    def __sub__(self, other) -> "RealInterval":
        if isinstance(other, RealInterval):
            return self + (-other)
        return self + (-to_rational(other))

    def __rsub__(self, other) -> "RealInterval":
        return (-self) + other

    def __mul__(self, other) -> "RealInterval":
        if isinstance(other, RealInterval):
            products = [self.lower * other.lower, self.lower * other.upper,
                        self.upper * other.lower, self.upper * other.upper]
            return self._combine(other, min(products), max(products))
        o = to_rational(other)
        lo, hi = self.lower * o, self.upper * o
        return self._combine(o, min(lo, hi), max(lo, hi))

    __rmul__ = __mul__

    def abs(self) -> "RealInterval":
        if self.lower >= 0:
            return self
        if self.upper <= 0:
            return -self
        return RealInterval(Fraction(0), max(-self.lower, self.upper), self.rigorous, self.note)

    def decimal(self, digits: int = 30) -> str:
        """Midpoint rendered with ``digits`` significant decimals (display only)."""
        import mpmath

        with mpmath.workdps(digits + 10):
            mid = mpmath.mpf(self.midpoint.numerator) / self.midpoint.denominator
            return mpmath.nstr(mid, digits)

    def __str__(self) -> str:
        tag = "" if self.rigorous else " (heuristic)"
        return f"[{self.decimal(20)} +/- {float(self.width / 2):.3e}]{tag}"


@dataclass(frozen=True)
class GrowthBound:
    """Coefficient bound |f(n)| <= c * max(n,1)^r * gamma^n."""

    c: Fraction
    r: int
    gamma: Fraction
    rigorous: bool = True
    note: str = ""

    def term(self, n: int) -> Fraction:
        return self.c * Fraction(max(n, 1)) ** self.r * self.gamma ** n


def _round_outward(lo: Fraction, hi: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    lo_n = math.floor(lo * scale)
    hi_n = -math.floor(-hi * scale)
    return Fraction(lo_n, scale), Fraction(hi_n, scale)


def tail_bound(bound: GrowthBound, t: Fraction, n_terms: int) -> Fraction | None:
    """Upper bound for sum_{n >= n_terms} |f(n) t^n|, or None if the
    geometric majorant does not converge from that index on."""
    q = bound.gamma * abs(t)
    if q >= 1:
        return None
    first = n_terms if n_terms >= 1 else 1
    ratio = Fraction(first + 1, first) ** bound.r * q
    if ratio >= 1:
        return None
    head = bound.term(first) * abs(t) ** first
    extra = bound.term(0) if n_terms == 0 else Fraction(0)
    return extra + head / (1 - ratio)


def fit_growth_bound(series: TruncatedSeries, holdout: float = 0.25) -> GrowthBound:
    """Heuristic (c, r, gamma) fitted on a prefix and validated on a held-out suffix."""
    n_all = series.budget
    if n_all < 16:
        raise BudgetError("need at least 17 coefficients to fit a growth bound", required=16)
    cut = int(n_all * (1 - holdout))
    mags = [abs(c) for c in series.coeffs]

    def log_abs(v: Fraction) -> float:
        return math.log(v.numerator) - math.log(v.denominator)

    rates = [log_abs(mags[n]) / n for n in range(max(1, cut // 8), cut + 1) if mags[n]]
    gamma_f = math.exp(max(rates)) if rates else 1.0
    gamma = Fraction(1) if gamma_f <= 1.0 else Fraction(math.ceil(gamma_f * 1.02 * 1024), 1024)
    for _ in range(8):
        for r in range(0, 9):
            c = Fraction(0)
            for n in range(cut + 1):
                if mags[n]:
                    c = max(c, mags[n] / (Fraction(max(n, 1)) ** r * gamma ** n))
            c = max(2 * c, Fraction(1))
            trial = GrowthBound(c, r, gamma, rigorous=False)
            if all(mags[n] <= trial.term(n) for n in range(cut + 1, n_all + 1)):
                return GrowthBound(c, r, gamma, rigorous=False,
                                   note=f"fitted on orders 0..{cut}, validated on {cut + 1}..{n_all}")
        gamma = gamma * Fraction(11, 10)
    raise BudgetError("could not fit a coefficient growth bound on the available prefix")


def _series_provider(source) -> tuple[Callable[[int], TruncatedSeries], GrowthBound | None]:
    if isinstance(source, TruncatedSeries):
        def fixed(n: int, s=source) -> TruncatedSeries:
            if n > s.budget:
                raise BudgetError(f"series budget {s.budget} too small; need {n}", required=n)
            return s.truncate(n)
        return fixed, None
    if hasattr(source, "series"):
        derived = source.growth_bound() if hasattr(source, "growth_bound") else None
        return source.series, derived
    if hasattr(source, "a") and hasattr(source, "k"):
        return (lambda n, eq=source: expand_series(eq, budget=n)), None
    if callable(source):
        return (lambda n: TruncatedSeries(source(n), n)), None
    raise InputError(f"cannot evaluate a {type(source).__name__}")


def eval_series_real(source, t: RationalLike, digits: int = 30,
                     growth_bound: GrowthBound | tuple | None = None) -> RealInterval:
    """Enclose F(t) in an interval of width <= 10^-digits.

    ``source`` may be a TruncatedSeries, a Mahler equation, an object with
    ``series(n)`` (and optionally ``growth_bound()``), or a callable
    returning coefficient lists.  ``rigorous`` is True when the growth bound
    was supplied or derived, False when it had to be fitted.
    """
    t = to_rational(t)
    if abs(t) >= 1:
        raise DomainError(f"|t| = {abs(t)} is not < 1")
    provider, derived = _series_provider(source)
    if t == 0:
        return RealInterval.exact(provider(0).coefficient(0), note="evaluation at 0")
    if growth_bound is not None and not isinstance(growth_bound, GrowthBound):
        c, r, gamma = growth_bound
        growth_bound = GrowthBound(to_rational(c), int(r), to_rational(gamma), True, "supplied")
    bound = growth_bound or derived
    eps = Fraction(1, 10 ** digits)
    if bound is None:
        probe = max(64, int(digits * 3.33 / max(1e-9, -math.log2(float(abs(t))))) // 2)
        bound = fit_growth_bound(provider(probe))
    for _ in range(6):
        if bound.gamma * abs(t) >= 1:
            raise DomainError(f"series diverges at {t}: gamma*|t| = {bound.gamma * abs(t)} >= 1")
        # pick a number of terms from a float estimate, then confirm exactly
        q = float(bound.gamma * abs(t))
        n_terms = max(8, int((digits * math.log(10) + math.log(float(bound.c) + 1) + 8) / -math.log(q)) + 8)
        while True:
            tb = tail_bound(bound, t, n_terms)
            if tb is not None and tb <= eps / 4:
                break
            n_terms = int(n_terms * 1.25) + 8
        series = provider(n_terms - 1)
        if all(abs(c) <= bound.term(n) for n, c in enumerate(series.coeffs)):
            break
        if bound.rigorous:
            raise InputError("supplied growth bound is violated by the series coefficients")
        bound = fit_growth_bound(series)
    else:
        raise BudgetError("coefficient growth fit did not stabilise")
    partial = series.evaluate_prefix(t)
    bits = math.ceil(digits * math.log2(10)) + 8
    lo, hi = _round_outward(partial - tb, partial + tb, bits)
    note = bound.note if bound.rigorous else f"heuristic tail: {bound.note}"
    return RealInterval(lo, hi, bound.rigorous, note)

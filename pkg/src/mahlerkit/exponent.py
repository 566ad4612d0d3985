"""Irrationality-exponent bounds, exponent combiners and empirical estimates.

Closed-form bounds are kept as products of integer powers, so their log2 is
exact integer arithmetic times log2 of small bases.  Values are materialized
as integers only when they are small enough to print.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .algebra import RealInterval, to_rational
from .errors import InputError

# above this many decimal digits a bound is only reported through its log
MATERIALIZE_DIGITS = 10_000


# ---------------------------------------------------------------------------
# rho comparisons


def power_less(base: int, e1: int, other: int, e2: int) -> bool:
    """base^e1 < other^e2 for positive integers, without huge powers when
    bit lengths already decide it."""
    if base <= 0 or other <= 0 or e1 < 0 or e2 < 0:
        raise InputError("power_less needs positive bases and nonnegative exponents")
    if base == 1 or e1 == 0:
        return 1 < other ** e2 if other > 1 and e2 > 0 else False
    lo1, hi1 = e1 * (base.bit_length() - 1), e1 * base.bit_length()
    lo2, hi2 = e2 * (other.bit_length() - 1), e2 * other.bit_length()
    if hi1 <= lo2:
        return True
    if hi2 <= lo1:
        return False
    return base ** e1 < other ** e2


def rho_less(a: int, b: int, threshold: Fraction) -> bool:
    """log|a|/log b < threshold, decided as |a|^den < b^num."""
    if b < 2 or a == 0:
        raise InputError("need b >= 2 and a != 0")
    threshold = to_rational(threshold)
    if threshold <= 0:
        return False
    if abs(a) == 1:
        return True
    return power_less(abs(a), threshold.denominator, b, threshold.numerator)


def rho_threshold(kind: str, **params) -> Fraction:
    """The ρ threshold attached to each bound formula."""
    if kind == "maineffective":
        return Fraction(1, params["d"] + 1)
    if kind == "main":
        return Fraction(1, params["d"] + 2)
    if kind == "thestuff":
        H, d, k = params["H"], params["d"], params["k"]
        return Fraction(1, 8 * H * H * d * k ** (2 * d + 1))
    if kind == "regularkkernel":
        return Fraction(1, params["L"] + 2)
    if kind == "value":
        return to_rational(params["threshold"])
    raise InputError(f"unknown rho threshold kind {kind!r}")


@dataclass(frozen=True)
class RhoVerdict:
    kind: str
    threshold: Fraction
    inequality: str
    passed: bool


def rho_check(a: int, b: int, threshold_kind: str, params: dict | None = None) -> RhoVerdict:
    params = params or {}
    th = rho_threshold(threshold_kind, **params)
    passed = rho_less(a, b, th)
    text = f"|{a}|^{th.denominator} < {b}^{th.numerator}"
    return RhoVerdict(threshold_kind, th, text, passed)


# ---------------------------------------------------------------------------
# bound formulas


@dataclass(frozen=True)
class BoundReport:
    formula: str
    params: dict
    factors: tuple[tuple[int, int], ...]
    log2: Fraction
    log2_exact: bool
    value: int | None
    hypotheses: tuple[tuple[str, bool], ...] = ()
    note: str = ""

    @property
    def applicable(self) -> bool:
        return all(ok for _, ok in self.hypotheses)

    @property
    def log10(self) -> mpmath.mpf:
        with mpmath.workdps(60):
            return self._log2_mp() * mpmath.log10(2)

    def _log2_mp(self) -> mpmath.mpf:
        with mpmath.workdps(60):
            return mpmath.fsum(mpmath.mpf(e) * mpmath.log(b, 2) for b, e in self.factors)

    def log10_str(self, digits: int = 15) -> str:
        with mpmath.workdps(max(60, digits + 20)):
            return mpmath.nstr(self.log10, digits)

    def to_dict(self) -> dict:
        return {
            "formula": self.formula,
            "params": {k: str(v) for k, v in sorted(self.params.items())},
            "log2": f"{self.log2.numerator}/{self.log2.denominator}",
            "log2_exact": self.log2_exact,
            "log10": self.log10_str(20),
            "value": None if self.value is None else str(self.value),
            "hypotheses": [{"name": n, "pass": ok} for n, ok in self.hypotheses],
            "applicable": self.applicable,
        }


def _merge(factors: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Combine powers, folding powers of two into base 2."""
    acc: dict[int, int] = {}
    for base, e in factors:
        if base < 1:
            raise InputError("bases must be positive integers")
        if base == 1 or e == 0:
            continue
        twos = (base & -base).bit_length() - 1
        if base == 1 << twos:
            acc[2] = acc.get(2, 0) + twos * e
        else:
            acc[base] = acc.get(base, 0) + e
    return tuple(sorted(acc.items()))


def _report(formula: str, params: dict, factors, hypotheses=(), note: str = "") -> BoundReport:
    factors = _merge(factors)
    exact = all(b == 2 for b, _ in factors)
    if exact:
        log2 = Fraction(sum(e for _, e in factors))
    else:
        with mpmath.workdps(80):
            val = mpmath.fsum(mpmath.mpf(e) * mpmath.log(b, 2) for b, e in factors)
            log2 = Fraction(int(mpmath.floor(val * 10 ** 40)), 10 ** 40)
    digits = float(log2) * math.log10(2)
    value = None
    if digits <= MATERIALIZE_DIGITS:
        value = 1
        for b, e in factors:
            value *= b ** e
    return BoundReport(formula, dict(params), factors, log2, exact, value, tuple(hypotheses), note)


def _positive(params: dict, names: Sequence[str]) -> None:
    for n in names:
        v = params.get(n)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise InputError(f"parameter {n} must be a positive integer")
    if "k" in names and params["k"] < 2:
        raise InputError("parameter k must be >= 2")


def _rho_hypotheses(kind: str, params: dict) -> list[tuple[str, bool]]:
    if "a" in params and "b" in params:
        v = rho_check(int(params["a"]), int(params["b"]), kind, params)
        return [(f"rho < {v.threshold}", v.passed)]
    return []


def maineffective_bound(H: int, d: int, k: int, **extra) -> BoundReport:
    """4^{H d^2} k^{5 d^2}."""
    params = dict(H=H, d=d, k=k, **extra)
    _positive(params, ["H", "d", "k"])
    return _report("maineffective", params, [(4, H * d * d), (k, 5 * d * d)],
                   _rho_hypotheses("maineffective", params))


def main_bound(H: int, d: int, k: int, **extra) -> BoundReport:
    """4^{H (k^d + 1) d^2} k^{5 d^2}."""
    params = dict(H=H, d=d, k=k, **extra)
    _positive(params, ["H", "d", "k"])
    return _report("main", params, [(4, H * (k ** d + 1) * d * d), (k, 5 * d * d)],
                   _rho_hypotheses("main", params))


def thestuff_bound(H: int, d: int, k: int, h: int, **extra) -> BoundReport:
    """(4 d H h^3)^{1536 H^6 k^{10d} d^2} k^{320 H^4 k^{6d} d^2}."""
    params = dict(H=H, d=d, k=k, h=h, **extra)
    _positive(params, ["H", "d", "k", "h"])
    e1 = 1536 * H ** 6 * k ** (10 * d) * d * d
    e2 = 320 * H ** 4 * k ** (6 * d) * d * d
    return _report("thestuff", params, [(4 * d * H * h ** 3, e1), (k, e2)],
                   _rho_hypotheses("thestuff", params))


def regularkkernel_bound(k: int, L: int, **extra) -> BoundReport:
    """39^{(2^6 k)^L}."""
    params = dict(k=k, L=L, **extra)
    _positive(params, ["k", "L"])
    return _report("regularkkernel", params, [(39, (64 * k) ** L)], _rho_hypotheses("regularkkernel", params))


def acthm2_bound(d: int, k: int, m: int, **extra) -> BoundReport:
    """d k (k^m + 1)."""
    params = dict(d=d, k=k, m=m, **extra)
    _positive(params, ["d", "k", "m"])
    n = d * k * (k ** m + 1)
    return _report("ACthm2", params, [(n, 1)], note="automatic-sequence bound")


FORMULAS: dict[str, Callable[..., BoundReport]] = {
    "maineffective": maineffective_bound,
    "main": main_bound,
    "thestuff": thestuff_bound,
    "regularkkernel": regularkkernel_bound,
    "ACthm2": acthm2_bound,
}


def theoretical_bound(formula: str, params: dict | None = None, **kwargs) -> BoundReport:
    merged = dict(params or {}, **kwargs)
    try:
        fn = FORMULAS[formula]
    except KeyError:
        raise InputError(f"unknown formula {formula!r}; choose from {sorted(FORMULAS)}") from None
    try:
        return fn(**merged)
    except TypeError as exc:
        raise InputError(f"bad parameters for {formula}: {exc}") from exc


def relaxed_combined_log2(H: int, d: int, k: int) -> mpmath.mpf:
    """log2 of 3 d^4 2^{2Hd(d-1)} k^{2(d-1)(2d+4)} (bounds the combined exponent)."""
    with mpmath.workdps(60):
        return (mpmath.log(3 * d ** 4, 2) + 2 * H * d * (d - 1)
                + 2 * (d - 1) * (2 * d + 4) * mpmath.log(k, 2))


# ---------------------------------------------------------------------------
# combiners


@dataclass(frozen=True)
class CombinedBound:
    value: Fraction
    delta: Fraction
    varrho: Fraction
    theta: Fraction
    ell: int
    theta_violations: tuple[int, ...] = ()
    note: str = ""


def combine_ARLem(measured: Sequence[int] | None, delta, varrho, theta, ell: int = 1) -> CombinedBound:
    """(1 + varrho) theta^ell / delta, with hypotheses 0 < delta <= varrho, theta >= 1, ell >= 1.

    With measured denominators q_n, theta is checked against the observed
    growth q_{n+1} <= c q_n^theta, c fitted on the first pair.
    """
    delta, varrho, theta = to_rational(delta), to_rational(varrho), to_rational(theta)
    if not 0 < delta:
        raise InputError(f"need 0 < delta, got delta = {delta}")
    if not delta <= varrho:
        raise InputError(f"need delta <= varrho, got {delta} > {varrho}")
    if not theta >= 1:
        raise InputError(f"need theta >= 1, got {theta}")
    if ell < 1:
        raise InputError(f"need ell >= 1, got {ell}")
    value = (1 + varrho) * theta ** ell / delta
    violations: list[int] = []
    note = ""
    qs = [int(q) for q in measured or () if int(q) > 0]
    if len(qs) >= 3:
        th = float(theta)
        logs = [_log_int(q) for q in qs]
        logc = logs[1] - th * logs[0]
        for n in range(1, len(qs) - 1):
            if logs[n + 1] > logc + th * logs[n] + 1e-9 * max(1.0, logs[n + 1]):
                violations.append(n)
        note = f"growth checked on {len(qs)} denominators"
    return CombinedBound(value, delta, varrho, theta, ell, tuple(violations), note)


def convergent_parameters(k: int, d: int, m: int, rho=0) -> dict:
    """Parameters giving 3 (1 - rho) d^4 k^{2m(d-1)}."""
    rho = to_rational(rho)
    return {
        "varrho": (1 - rho) * d * k ** (m * (d - 1)) - 1,
        "theta": Fraction(k),
        "delta": Fraction(1, 3 * d ** 3),
        "ell": max(1, m * (d - 1)),
    }


def _log_int(q: int) -> float:
    """Natural log of a possibly huge positive integer."""
    if q.bit_length() < 1000:
        return math.log(q)
    shift = q.bit_length() - 64
    return math.log(q >> shift) + shift * math.log(2)


# ---------------------------------------------------------------------------
# empirical exponent


@dataclass(frozen=True)
class ExponentEstimate:
    quotients: tuple[int, ...]
    denominators: tuple[int, ...]
    mu: tuple[float, ...]
    running_max: tuple[float, ...]
    estimate: float
    stable: bool
    rational: bool
    truncated: bool
    note: str = ""

    @property
    def certified(self) -> int:
        return len(self.quotients)


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


def continued_fraction(value: RealInterval, max_quotients: int) -> tuple[list[int], bool, bool]:
    """Partial quotients valid for every point of the interval.

    Returns (quotients, rational, truncated): rational when an exact value
    terminates, truncated when the interval stops deciding the next quotient.
    """
    lo, hi = Fraction(value.lower), Fraction(value.upper)
    out: list[int] = []
    while len(out) < max_quotients:
        a_lo, a_hi = _floor(lo), _floor(hi)
        if a_lo != a_hi:
            return out, False, True
        out.append(a_lo)
        rlo, rhi = lo - a_lo, hi - a_lo
        if rlo == 0:
            if rhi == 0:
                return out, True, False
            return out, False, True
        lo, hi = 1 / rhi, 1 / rlo
    return out, False, False


def convergents_from_quotients(quotients: Sequence[int]) -> list[tuple[int, int]]:
    p0, q0, p1, q1 = 1, 0, 0, 1
    out = []
    for a in quotients:
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
        out.append((p0, q0))
    return out


def empirical_exponent(value: RealInterval, max_quotients: int = 200, window: int | None = None) -> ExponentEstimate:
    """mu_n = 1 + log q_{n+1} / log q_n on certified continued-fraction convergents.

    The estimate is the largest mu_n over the last half of the certified
    prefix (early terms are dominated by small denominators); ``stable``
    says that this tail maximum and the tail's last value agree within 10%.
    """
    quotients, rational, truncated = continued_fraction(value, max_quotients)
    convs = convergents_from_quotients(quotients)
    qs = [q for _, q in convs]
    for p, q in convs[:-1]:
        for end in (value.lower, value.upper):
            if not abs(end - Fraction(p, q)) < Fraction(1, q * q):
                raise InputError("convergent violates |x - p/q| < 1/q^2; interval arithmetic is broken")
    mu: list[float] = []
    for n in range(len(qs) - 1):
        if qs[n] > 1:
            mu.append(1 + _log_int(qs[n + 1]) / _log_int(qs[n]))
    running, best = [], -math.inf
    for v in mu:
        best = max(best, v)
        running.append(best)
    if mu:
        w = window or max(1, len(mu) // 2)
        tail = mu[-w:]
        estimate = max(tail)
        stable = abs(estimate - tail[-1]) <= 0.1 * estimate
    else:
        estimate, stable = (1.0 if rational else math.nan), False
    note = ""
    if truncated:
        note = f"interval decides only {len(quotients)} quotients"
    if rational:
        note = "expansion terminates: the value is rational"
    return ExponentEstimate(tuple(quotients), tuple(qs), tuple(mu), tuple(running), estimate, stable,
                            rational, truncated, note)


def constructed_exponents(table, values: Sequence[RealInterval], index: int) -> list[float | None]:
    """-log|F(a/b) - p/q| / log q for the constructed convergents of one row index."""
    out: list[float | None] = []
    for row in table.rows:
        if row.skipped or row.q <= 1:
            out.append(None)
            continue
        err = (values[index] - Fraction(row.p[index], row.q)).abs()
        if err.lower <= 0:
            out.append(None)
            continue
        out.append(-_log_fraction(err.lower) / _log_int(row.q))
    return out


def _log_fraction(x: Fraction) -> float:
    return _log_int(x.numerator) - _log_int(x.denominator)


def thestuff_height(eq, series=None) -> tuple[int, bool]:
    """Integer h for the thestuff bound: ceiling of the larger of the
    coefficient height and |f(0..H)|; False when the prefix was too short."""
    from .mahler import equation_height

    h, complete = equation_height(eq, series)
    return max(1, math.ceil(h)), complete

"""Command-line front end.

Every subcommand prints one canonical JSON document (sorted keys, no
whitespace) or, where it makes sense, a TSV table preceded by ``#`` header
lines.  Exit codes: 0 success, 1 input error, 2 hypothesis failure,
3 undecided numeric comparison.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from . import __version__
from .algebra import Polynomial, RealInterval, eval_series_real, expand_series, rational_str
from .errors import Defect, HypothesisError, MahlerkitError, PrecisionError
from .mahler import MahlerEquation

DEFAULT_BUDGET = 512
DEFAULT_DIGITS = 100

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_PRECISION = 0, 1, 2, 3


class CliInputError(Exception):
    pass


# ---------------------------------------------------------------------------
# input parsing


def _parse_rational(text: Any, pointer: str, warnings: list[str]) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise CliInputError(f"{pointer}: expected a rational string like \"3/4\"")
    s = str(text).strip()
    try:
        if "/" in s:
            num_s, den_s = s.split("/", 1)
            num, den = int(num_s), int(den_s)
        else:
            num, den = int(s), 1
    except ValueError:
        raise CliInputError(f"{pointer}: not a rational: {text!r}") from None
    if den == 0:
        raise CliInputError(f"{pointer}: zero denominator")
    value = Fraction(num, den)
    if "/" in s and (value.numerator != num or value.denominator != den):
        warnings.append(f"{pointer}: {s} normalized to {rational_str(value)}")
    return value


def _parse_poly(value: Any, pointer: str, warnings: list[str]) -> Polynomial:
    if not isinstance(value, list):
        raise CliInputError(f"{pointer}: expected a list of coefficients")
    return Polynomial([_parse_rational(c, f"{pointer}/{i}", warnings) for i, c in enumerate(value)])


def _parse_int(value: Any, pointer: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise CliInputError(f"{pointer}: expected an integer")
    return value


def parse_equation(doc: Any, warnings: list[str]) -> MahlerEquation:
    if not isinstance(doc, dict):
        raise CliInputError("/: expected a JSON object")
    for key in doc:
        if key not in ("k", "p", "a", "seed"):
            raise CliInputError(f"/{key}: unknown field")
    if "k" not in doc:
        raise CliInputError("/k: missing")
    if "a" not in doc:
        raise CliInputError("/a: missing")
    k = _parse_int(doc["k"], "/k")
    if not isinstance(doc["a"], list) or not doc["a"]:
        raise CliInputError("/a: expected a nonempty list of polynomials")
    a = tuple(_parse_poly(c, f"/a/{i}", warnings) for i, c in enumerate(doc["a"]))
    p = _parse_poly(doc.get("p", []), "/p", warnings)
    seed = ()
    if "seed" in doc:
        if not isinstance(doc["seed"], list):
            raise CliInputError("/seed: expected a list")
        seed = tuple(_parse_rational(c, f"/seed/{i}", warnings) for i, c in enumerate(doc["seed"]))
    try:
        return MahlerEquation(k, a, p, seed)
    except MahlerkitError as exc:
        raise CliInputError(f"/: {exc}") from exc


def parse_sequence(doc: Any, warnings: list[str]):
    from .regular import LinearRepresentation

    if not isinstance(doc, dict):
        raise CliInputError("/: expected a JSON object")
    for key in doc:
        if key not in ("k", "dim", "u", "v", "M", "check_terms"):
            raise CliInputError(f"/{key}: unknown field")
    for key in ("k", "u", "v", "M"):
        if key not in doc:
            raise CliInputError(f"/{key}: missing")
    k = _parse_int(doc["k"], "/k")

    def vec(name):
        if not isinstance(doc[name], list):
            raise CliInputError(f"/{name}: expected a list")
        return tuple(_parse_rational(c, f"/{name}/{i}", warnings) for i, c in enumerate(doc[name]))

    u, v = vec("u"), vec("v")
    if not isinstance(doc["M"], list):
        raise CliInputError("/M: expected a list of matrices")
    mats = []
    for j, m in enumerate(doc["M"]):
        if not isinstance(m, list):
            raise CliInputError(f"/M/{j}: expected a matrix")
        rows = []
        for r, row in enumerate(m):
            if not isinstance(row, list):
                raise CliInputError(f"/M/{j}/{r}: expected a row")
            rows.append(tuple(_parse_rational(c, f"/M/{j}/{r}/{i}", warnings) for i, c in enumerate(row)))
        mats.append(tuple(rows))
    checks = vec("check_terms") if "check_terms" in doc else ()
    if "dim" in doc and _parse_int(doc["dim"], "/dim") != len(u):
        raise CliInputError("/dim: does not match the length of u")
    try:
        return LinearRepresentation(k, u, tuple(mats), v, checks)
    except MahlerkitError as exc:
        raise CliInputError(f"/: {exc}") from exc


def _load_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliInputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc


def parse_input(path: str, warnings: list[str] | None = None):
    """MahlerEquation for files with an "a" field, LinearRepresentation for "M"."""
    warnings = [] if warnings is None else warnings
    doc = _load_json(path)
    if isinstance(doc, dict) and "M" in doc:
        return parse_sequence(doc, warnings)
    return parse_equation(doc, warnings)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def schema(name: str) -> dict:
    """Published JSON schema for a subcommand's output (or an input format)."""
    ref = resources.files("mahlerkit") / "schemas" / f"{name}.schema.json"
    return json.loads(ref.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# helpers


def _point(text: str) -> Fraction:
    warnings: list[str] = []
    t = _parse_rational(text, "--at", warnings)
    return t


def _q(x: Fraction) -> str:
    return rational_str(Fraction(x))


def _poly(p: Polynomial) -> list[str]:
    return p.to_strings()


def _interval(iv: RealInterval, digits: int) -> dict:
    return {"lower": _q(iv.lower), "upper": _q(iv.upper), "decimal": iv.decimal(digits),
            "rigorous": iv.rigorous}


def _need_equation(obj, flag: str = "--eq") -> MahlerEquation:
    if not isinstance(obj, MahlerEquation):
        raise CliInputError(f"{flag}: expected a Mahler equation file")
    return obj


def _need_sequence(obj):
    from .regular import LinearRepresentation

    if not isinstance(obj, LinearRepresentation):
        raise CliInputError("--seq: expected a linear representation file")
    return obj


def _matrix_json(m) -> list:
    return [[_poly(e) for e in row] for row in m.entries]


def _growth(args) -> tuple | None:
    if getattr(args, "growth", None):
        parts = args.growth.split(",")
        if len(parts) != 3:
            raise CliInputError("--growth: expected c,r,gamma")
        w: list[str] = []
        return (_parse_rational(parts[0], "--growth/c", w), int(parts[1]), _parse_rational(parts[2], "--growth/gamma", w))
    return None


# ---------------------------------------------------------------------------
# subcommands


def cmd_expand(args, warnings):
    eq = _need_equation(parse_input(args.eq, warnings))
    s = expand_series(eq, budget=args.budget)
    return {"k": eq.k, "coefficients": s.to_strings()}, None


def cmd_eval(args, warnings):
    obj = parse_input(args.eq or args.seq, warnings)
    t = _point(args.at)
    iv = eval_series_real(obj, t, args.digits, _growth(args))
    return {"at": _q(t), "value": _interval(iv, args.digits), "note": iv.note}, None


def cmd_pade(args, warnings):
    from .approx import hermite_pade
    from .mahler import companion_system

    eq = _need_equation(parse_input(args.eq, warnings))
    sys_ = companion_system(eq, budget=args.budget)
    pade = hermite_pade(sys_)
    return {
        "dimension": sys_.dim, "H": sys_.H, "degree_bound": pade.degree_bound,
        "target_order": pade.target_order, "Q": _poly(pade.Q), "P": [_poly(p) for p in pade.P],
        "order": [str(o) for o in pade.order],
    }, None


def _quality(table, values, digits):
    from .approx import quality_report

    return quality_report(table, values, digits=digits)


def cmd_convergents(args, warnings):
    from .approx import companion_values, hermite_pade, integer_convergents, iterate_convergents, table_to_dict, table_to_tsv
    from .exponent import rho_check
    from .mahler import companion_system

    eq = _need_equation(parse_input(args.eq, warnings))
    t = _point(args.at)
    sys_ = companion_system(eq, budget=args.budget)
    verdict = rho_check(t.numerator, t.denominator, "maineffective", {"d": sys_.dim})
    if not verdict.passed:
        raise HypothesisError(f"rho = log|a|/log b must be < {verdict.threshold}: {verdict.inequality} fails")
    pade = hermite_pade(sys_)
    convs = iterate_convergents(sys_, pade, args.n, args.term_cap)
    table = integer_convergents(convs, t.numerator, t.denominator, sys_.k, sys_.dim, sys_.H)
    report = _quality(table, companion_values(eq, t, _growth(args)), args.digits)
    tsv = table_to_tsv(table, report)
    return table_to_dict(table, report), tsv


def cmd_normalize(args, warnings):
    from .mahler import normalize_origin

    eq = _need_equation(parse_input(args.eq, warnings))
    series = expand_series(eq, budget=args.budget)
    res = normalize_origin(eq, series)
    return {
        "delta": res.delta, "M": res.M, "P": _poly(res.P), "b": [_poly(b) for b in res.b],
        "E_prefix": res.E.truncate(min(16, res.E.budget)).to_strings(),
        "checks": {k: bool(v) for k, v in sorted(res.checks.items())},
    }, None


def cmd_minimize(args, warnings):
    from .mahler import minimal_annihilator

    eq = _need_equation(parse_input(args.eq, warnings))
    series = expand_series(eq, budget=args.budget)
    res = minimal_annihilator(eq, series)
    return {"input_order": eq.d, "order": res.d, "equation": res.to_dict()}, None


def cmd_resolve(args, warnings):
    from .mahler import companion_system, equation_system, resolve_singularity

    eq = _need_equation(parse_input(args.eq, warnings))
    t = _point(args.at)
    sys_ = equation_system(eq, args.budget) if not eq.p else companion_system(eq, args.budget)
    res = resolve_singularity(sys_, t.numerator, t.denominator, digits=min(args.digits, 60))
    return {
        "s": res.s, "N": res.N, "zero_orders": list(res.zero_orders), "trivial": res.trivial,
        "dimension": res.system.dim, "target_index": res.target_index,
        "horizon": res.scan.horizon, "certified_horizon": res.scan.certified_horizon,
        "zeros": [list(z) for z in res.scan.zeros],
        "identity_check": {k: (v if isinstance(v, (bool, int)) else str(v))
                           for k, v in sorted(res.identity_check.items())},
    }, None


def cmd_regular_reduce(args, warnings):
    from .regular import kernel_system, reduce_to_independent, regular_to_convergents, syzygy_basis

    rep = _need_sequence(parse_input(args.seq, warnings))
    t = _point(args.at)
    kb, sys_ = kernel_system(rep, args.budget)
    syz = syzygy_basis(sys_)
    red = reduce_to_independent(sys_, syz, t)
    out = {
        "L": kb.L, "S": red.S, "A": _matrix_json(sys_.numerator),
        "W": [[_poly(e) for e in w.row(0)] for w in syz.basis],
        "degree_needed": syz.degree_needed,
        "C22": {"numerator": _matrix_json(red.C22.numerator), "q": _poly(red.C22.denominator)},
        "r": [_q(x) for x in red.r], "notes": list(red.notes) + ([kb.note] if kb.note else []),
    }
    if args.n is not None:
        from .approx import table_to_dict

        res = regular_to_convergents(rep, t.numerator, t.denominator, args.n, args.budget, args.term_cap)
        report = _quality(res.table, res.values, args.digits)
        out["convergents"] = table_to_dict(res.table, report)
    return out, None


def cmd_bound(args, warnings):
    from .exponent import theoretical_bound

    params = {k: getattr(args, k) for k in ("H", "d", "k", "h", "L", "m", "a", "b") if getattr(args, k) is not None}
    rep = theoretical_bound(args.formula, params)
    return rep.to_dict(), None


def cmd_estimate(args, warnings):
    from .exponent import empirical_exponent

    if args.value is not None:
        w: list[str] = []
        iv = RealInterval.exact(_parse_rational(args.value, "--value", w))
    else:
        if not (args.eq or args.seq) or args.at is None:
            raise CliInputError("estimate needs --value, or --eq/--seq with --at")
        obj = parse_input(args.eq or args.seq, warnings)
        iv = eval_series_real(obj, _point(args.at), args.digits, _growth(args))
    est = empirical_exponent(iv, args.max_quotients)
    return {
        "certified_quotients": est.certified, "quotients": [str(q) for q in est.quotients[:64]],
        "estimate": f"{est.estimate:.6f}", "stable": est.stable, "rational": est.rational,
        "truncated": est.truncated, "note": est.note, "rigorous": iv.rigorous,
    }, None


def cmd_polymat_complete(args, warnings):
    from .polymat import PolyMatrix, unimodular_complete

    doc = _load_json(args.matrix)
    rows = doc.get("rows") if isinstance(doc, dict) else doc
    if not isinstance(rows, list) or not rows:
        raise CliInputError("/rows: expected a nonempty list of rows")
    grid = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise CliInputError(f"/rows/{i}: expected a list of polynomials")
        grid.append([_parse_poly(e, f"/rows/{i}/{j}", warnings) for j, e in enumerate(row)])
    T = PolyMatrix(grid)
    res = unimodular_complete(T)
    return {"U": _matrix_json(res.matrix), "U_inverse": _matrix_json(res.inverse),
            "determinant": _q(res.determinant())}, None


COMMANDS = {
    "expand": cmd_expand,
    "eval": cmd_eval,
    "pade": cmd_pade,
    "convergents": cmd_convergents,
    "normalize": cmd_normalize,
    "minimize": cmd_minimize,
    "resolve": cmd_resolve,
    "regular-reduce": cmd_regular_reduce,
    "bound": cmd_bound,
    "estimate": cmd_estimate,
    "polymat-complete": cmd_polymat_complete,
}


# ---------------------------------------------------------------------------
# argument parsing


def _budget(text: str) -> int:
    v = int(text)
    if v < 64:
        raise argparse.ArgumentTypeError("budget must be >= 64")
    return v


def _expand_budget(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("budget must be >= 0")
    return v


def _digits(text: str) -> int:
    v = int(text)
    if v < 10:
        raise argparse.ArgumentTypeError("digits must be >= 10")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mahlerkit", description="Mahler functions, approximations and exponent bounds.")
    parser.add_argument("--version", action="version", version=f"mahlerkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True, digits=True, fmt=False):
        if budget:
            p.add_argument("--budget", type=_budget, default=DEFAULT_BUDGET, help="series coefficients (>= 64)")
        if digits:
            p.add_argument("--digits", type=_digits, default=DEFAULT_DIGITS, help="decimal digits (>= 10)")
        p.add_argument("--format", choices=["json", "tsv"] if fmt else ["json"], default="json")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("expand", help="power-series coefficients of an equation's solution")
    p.add_argument("--eq", required=True)
    p.add_argument("--budget", type=_expand_budget, default=DEFAULT_BUDGET, help="highest exponent")
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("eval", help="enclose F(a/b) in an interval")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eq")
    g.add_argument("--seq")
    p.add_argument("--at", required=True)
    p.add_argument("--growth", help="coefficient bound c,r,gamma: |f_n| <= c max(n,1)^r gamma^n")
    common(p, budget=False)

    p = sub.add_parser("pade", help="Hermite-Pade approximants of the companion system")
    p.add_argument("--eq", required=True)
    common(p, digits=False)

    p = sub.add_parser("convergents", help="integer convergents and their quality checks")
    p.add_argument("--eq", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--term-cap", type=int, default=4096)
    p.add_argument("--growth")
    common(p, fmt=True)

    p = sub.add_parser("normalize", help="rewrite F = P + x^M E with b_0(0) != 0")
    p.add_argument("--eq", required=True)
    common(p, digits=False)

    p = sub.add_parser("minimize", help="minimal annihilator of the solution")
    p.add_argument("--eq", required=True)
    common(p, digits=False)

    p = sub.add_parser("resolve", help="remove zeros of B at the evaluation orbit")
    p.add_argument("--eq", required=True)
    p.add_argument("--at", required=True)
    common(p)

    p = sub.add_parser("regular-reduce", help="reduce a k-regular sequence to an independent system")
    p.add_argument("--seq", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--n", type=int, default=None, help="also compute convergents up to n")
    p.add_argument("--term-cap", type=int, default=4096)
    common(p)

    p = sub.add_parser("bound", help="closed-form irrationality-exponent bounds")
    p.add_argument("--formula", required=True, choices=["maineffective", "main", "thestuff", "regularkkernel", "ACthm2"])
    for name in ("H", "d", "k", "h", "L", "m", "a", "b"):
        p.add_argument(f"--{name}", type=int, default=None)
    common(p, budget=False, digits=False)

    p = sub.add_parser("estimate", help="empirical exponent from continued fractions")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eq")
    g.add_argument("--seq")
    g.add_argument("--value", help="exact rational value")
    p.add_argument("--at")
    p.add_argument("--max-quotients", type=int, default=200)
    p.add_argument("--growth")
    common(p, budget=False)

    p = sub.add_parser("polymat-complete", help="complete a unimodular polynomial matrix")
    p.add_argument("--matrix", required=True, help='JSON {"rows": [[[coeff, ...], ...], ...]}')
    common(p, budget=False, digits=False)
    return parser


def _header(args) -> dict:
    head = {"command": args.command, "version": __version__}
    for name in ("budget", "digits"):
        if hasattr(args, name):
            head[name] = getattr(args, name)
    return head


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    warnings: list[str] = []
    try:
        result, tsv = COMMANDS[args.command](args, warnings)
    except CliInputError as exc:
        print(f"input error: {exc}", file=err)
        return EXIT_INPUT
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=err)
        return EXIT_HYPOTHESIS
    except PrecisionError as exc:
        print(f"undecided comparison: {exc}; rerun with a larger --digits", file=err)
        return EXIT_PRECISION
    except Defect as exc:
        print(f"internal consistency failure: {exc}", file=err)
        return EXIT_INPUT
    except (MahlerkitError, ValueError, ZeroDivisionError) as exc:
        print(f"input error: {exc}", file=err)
        return EXIT_INPUT
    for w in warnings:
        print(f"warning: {w}", file=err)
    if args.format == "tsv" and tsv is not None:
        head = _header(args)
        lines = [f"# {k}={v}" for k, v in sorted(head.items())]
        out.write("\n".join(lines) + "\n" + tsv)
    else:
        out.write(canonical_json({"header": _header(args), "result": result}) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

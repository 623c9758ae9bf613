"""Command-line front end.

Exit codes: 0 success, 1 usage or validation error, 2 resource guard
exceeded, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import analytic, combinatorial, jsonio
from .behaviors import classify, ingest
from .combinatorial import (
    BISEPARABLE,
    CLOSED_FORM,
    EXACT,
    LOCAL,
    SVETLICHNY,
    TSIRELSON,
    BoundReport,
)
from .errors import GuardExceededError, ValidationError, VerificationError
from .quantum import optimize_phases
from .scenario import (
    BellExpression,
    CoefficientFunction,
    Scenario,
    bkp_form,
    bkp_to_omega,
    build_general,
    build_omega,
    expand,
    is_omega,
    reduce_to_bkp,
    reduce_to_svetlichny_cglmp,
    svetlichny_cglmp_form,
    svetlichny_cglmp_to_omega,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GUARD = 2
EXIT_MISMATCH = 3


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2, which is reserved for guards
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class Output:
    doc: Any
    headers: list[str] = field(default_factory=list)
    rows: list[list[Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    exit_code: int = EXIT_OK


# --------------------------------------------------------------------------
# argument helpers


def parse_f(spec: str, m: int | None, k: int | None) -> CoefficientFunction | BellExpression:
    """Coefficient function from a CLI selector; a file selector yields a whole expression."""
    if spec.startswith("file:") or spec.endswith(".json"):
        path = spec[5:] if spec.startswith("file:") else spec
        try:
            return BellExpression.from_json(Path(path))
        except OSError as exc:
            raise UsageError(f"cannot read expression file {path}: {exc}") from exc
    if m is None or k is None:
        raise UsageError("-m and -k are required unless --f names an expression file")
    if spec in ("fI", "f_I", "omega"):
        return CoefficientFunction.omega(m, k)
    if spec == "mabk":
        return CoefficientFunction.mabk(m, k)
    if spec.startswith("cosine:"):
        try:
            delta = float(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad cosine offset in --f {spec!r}") from None
        return CoefficientFunction.cosine(m, delta, k)
    if spec.startswith("g:"):
        parts = spec[2:].split(",")
        try:
            g = [int(p) for p in parts]
        except ValueError:
            try:
                g = [float(p) for p in parts]
            except ValueError:
                raise UsageError(f"bad g-vector in --f {spec!r}") from None
        if len(g) != m:
            raise UsageError(f"g-vector has {len(g)} entries but m={m}")
        return CoefficientFunction.product(g, k)
    raise UsageError(f"unknown --f selector {spec!r} (use fI, mabk, cosine:D, g:v1,...,vm or file:PATH)")


def resolve_expression(args: argparse.Namespace) -> BellExpression:
    f = parse_f(args.f, args.m, args.k)
    if isinstance(f, BellExpression):
        sc = f.scenario
        for name in ("n", "m", "k"):
            given = getattr(args, name, None)
            if given is not None and given != getattr(sc, name):
                raise UsageError(f"-{name} {given} disagrees with the expression file ({name}={getattr(sc, name)})")
        return f
    if args.n is None:
        raise UsageError("-n is required")
    return build_general(Scenario(args.n, args.m, args.k), f)


def parse_range(text: str) -> list[int]:
    """'2..4' -> [2, 3, 4]; '2,5' -> [2, 5]; '4..2' -> []."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        if not text:
            return []
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6f}"
    return "" if value is None else str(value)


def _exact_bipartite_local(expr: BellExpression, guard: int) -> Any:
    sc = expr.scenario
    if is_omega(expr):
        return sc.k - 1
    bip = build_general(Scenario(2, sc.m, sc.k), expr.f)
    return combinatorial.local_bound(bip, guard).value


# --------------------------------------------------------------------------
# commands


def _bound_rows(reports: Sequence[BoundReport]) -> list[list[Any]]:
    return [[r.kind, r.method, r.value] for r in reports]


def cmd_bounds(args: argparse.Namespace) -> Output:
    expr = resolve_expression(args)
    sc = expr.scenario
    guard = args.guard
    want_local = args.local or args.all
    want_svet = args.svetlichny or args.all
    want_diew = args.diew or args.all
    want_tsir = args.tsirelson or args.all
    if not (want_local or want_svet or want_diew or want_tsir or args.g_group):
        raise UsageError("choose at least one of --local, --svetlichny, --g-group, --diew, --tsirelson, --all")

    reports: list[BoundReport] = []
    notes: list[str] = []
    if want_local:
        reports.append(combinatorial.local_bound(expr, guard))
    if want_svet:
        if sc.n >= 3:
            reports.append(combinatorial.svetlichny_bound(expr, guard))
            value = analytic.svetlichny_bound_closed(sc, _exact_bipartite_local(expr, guard))
            reports.append(BoundReport(SVETLICHNY, value, CLOSED_FORM, None, expr))
        elif args.svetlichny:
            raise UsageError("the Svetlichny bound needs n >= 3 (it equals the local bound for n = 2)")
    if args.g_group:
        reports.append(combinatorial.g_group_bound(expr, args.g_group, guard))
    if want_diew:
        g = expr.f.product_vector()
        if sc.k == 2 and g is not None and sc.n >= 3:
            _, j = analytic.diew_max_term(sc.m, g)
            reports.append(BoundReport(BISEPARABLE, analytic.diew_bound_binary(sc.n, sc.m, g), CLOSED_FORM, {"j": j}, expr))
        elif args.diew:
            raise UsageError("the biseparable (DIEW) bound needs n >= 3, k = 2 and f(s, r) = g(s) * r")
        else:
            notes.append("biseparable bound: no closed form for this expression")
    if want_tsir:
        if args.bipartite_quantum is not None:
            value = analytic.tsirelson_bound_recursive(sc, expr.f, args.bipartite_quantum)
            reports.append(BoundReport(TSIRELSON, value, CLOSED_FORM, {"bipartite": args.bipartite_quantum}, expr))
        elif is_omega(expr) and sc.k == 2:
            reports.append(BoundReport(TSIRELSON, analytic.tsirelson_bound_binary(sc.n, sc.m), CLOSED_FORM, None, expr))
        elif args.tsirelson:
            raise UsageError("no built-in Tsirelson bound for this expression; pass --bipartite-quantum VALUE")
        else:
            notes.append("tsirelson bound: no closed form for this expression")

    doc = {"expression": expr.to_json(), "bounds": [r.to_json() for r in reports]}
    return Output(doc, ["kind", "method", "value"], _bound_rows(reports), notes)


def cmd_reduce_check(args: argparse.Namespace) -> Output:
    if args.family == "bkp":
        n = 2 if args.n is None else args.n
        if n != 2:
            raise UsageError(f"the BKP reduction requires n=2, got n={n}")
        sc = Scenario(2, args.m if args.m is not None else 2, args.k if args.k is not None else 2)
        expr = build_omega(sc)
        relabelled = reduce_to_bkp(expr, args.guard)
        target = bkp_form(sc.m, sc.k)
        back = bkp_to_omega(relabelled, args.guard)
    else:
        m = 2 if args.m is None else args.m
        if m != 2:
            raise UsageError(f"the Svetlichny-CGLMP reduction requires m=2, got m={m}")
        sc = Scenario(args.n if args.n is not None else 2, 2, args.k if args.k is not None else 2)
        expr = build_omega(sc)
        relabelled = reduce_to_svetlichny_cglmp(expr, args.guard)
        target = svetlichny_cglmp_form(sc.n, sc.k)
        back = svetlichny_cglmp_to_omega(relabelled, args.guard)
    matches = relabelled == target
    roundtrip = back == expand(expr, args.guard)
    rows = [["target-form", "match" if matches else "mismatch"], ["round-trip", "match" if roundtrip else "mismatch"]]
    doc = {"family": args.family, "n": sc.n, "m": sc.m, "k": sc.k, "match": matches, "round_trip": roundtrip}
    code = EXIT_OK if matches and roundtrip else EXIT_MISMATCH
    return Output(doc, ["check", "result"], rows, exit_code=code)


def cmd_ghz_opt(args: argparse.Namespace) -> Output:
    if args.k is not None and args.k != 2:
        raise UsageError(f"the GHZ model has binary outcomes; -k must be 2, got {args.k}")
    if args.k is None:
        args.k = 2
    expr = resolve_expression(args)
    if expr.scenario.k != 2:
        raise UsageError("the GHZ model has binary outcomes; expression must have k = 2")
    report = optimize_phases(expr, seed=args.seed, restarts=args.restarts, max_iters=args.max_iters,
                             target_bound=args.target)
    if args.angles_out:
        Path(args.angles_out).write_text(jsonio.dumps(report.angles.to_json()) + "\n")
    rows = [["value", report.value], ["target", report.target_bound], ["gap", report.gap]]
    notes = ["angles (rows = parties, columns = settings):"]
    notes += ["  " + " ".join(f"{a:.6f}" for a in row) for row in report.angles.phi]
    return Output(report.to_json(), ["quantity", "value"], rows, notes)


def _classification_bounds(expr: BellExpression, guard: int) -> list[BoundReport]:
    reports = [combinatorial.local_bound(expr, guard)]
    if expr.scenario.n >= 3:
        reports.append(combinatorial.svetlichny_bound(expr, guard))
    for r in analytic.closed_form_bounds(expr):
        if r.kind in (BISEPARABLE, TSIRELSON):
            reports.append(r)
    return reports


def cmd_classify(args: argparse.Namespace) -> Output:
    behavior = ingest(args.behavior)
    sc = behavior.scenario
    for name in ("n", "m", "k"):
        given = getattr(args, name)
        if given is not None and given != getattr(sc, name):
            raise UsageError(f"-{name} {given} does not match the behavior file ({name}={getattr(sc, name)})")
        setattr(args, name, getattr(sc, name))
    expr = resolve_expression(args)
    if expr.scenario != sc:
        raise UsageError(f"expression scenario {expr.scenario} does not match the behavior file {sc}")
    report = classify(expr, behavior, _classification_bounds(expr, args.guard))
    rows = [[v.kind, v.method, v.bound, v.margin, "violated" if v.violated else "satisfied"] for v in report.verdicts]
    summary = "; ".join(
        f"{'violates' if v.violated else 'satisfies'} {v.kind} (margin {v.margin:.6f})" for v in report.verdicts
    )
    notes = [f"value {report.value:.6f}; {summary}"]
    return Output(report.to_json(), ["kind", "method", "bound", "margin", "verdict"], rows, notes)


def cmd_table(args: argparse.Namespace) -> Output:
    kinds = [x.strip() for x in args.kinds.split(",") if x.strip()]
    allowed = {LOCAL, SVETLICHNY, "diew", TSIRELSON}
    unknown = set(kinds) - allowed
    if unknown:
        raise UsageError(f"unknown bound kinds {sorted(unknown)}; choose from {sorted(allowed)}")
    args.kinds = kinds
    rows: list[list[Any]] = []
    for n in parse_range(args.n_range):
        for m in parse_range(args.m_range):
            for k in parse_range(args.k_range):
                sc = Scenario(n, m, k)
                expr = build_omega(sc)
                for kind in kinds:
                    rows.extend(_table_cells(expr, kind, args))
    doc = [dict(zip(TABLE_HEADERS, row)) for row in rows]
    return Output(doc, list(TABLE_HEADERS), rows)


TABLE_HEADERS = ("n", "m", "k", "bound_kind", "method", "value")


def _table_cells(expr: BellExpression, kind: str, args: argparse.Namespace) -> list[list[Any]]:
    sc = expr.scenario
    n, m, k = sc.n, sc.m, sc.k
    out = []
    if n == 2 and (kind == LOCAL or (kind == SVETLICHNY and LOCAL not in args.kinds)):
        # with two parties the Svetlichny notion collapses to the local one
        out.append([n, m, k, LOCAL, CLOSED_FORM, k - 1])
    if kind == SVETLICHNY and n >= 3:
        out.append([n, m, k, SVETLICHNY, CLOSED_FORM, analytic.svetlichny_bound_closed(sc, k - 1)])
    if kind == "diew" and k == 2 and n >= 3:
        out.append([n, m, k, BISEPARABLE, CLOSED_FORM, analytic.diew_bound_binary(n, m, expr.f.product_vector())])
    if kind == TSIRELSON and k == 2:
        out.append([n, m, k, TSIRELSON, CLOSED_FORM, analytic.tsirelson_bound_binary(n, m)])
    if args.exact and kind in (LOCAL, SVETLICHNY) and (kind == LOCAL or n >= 3):
        fn = combinatorial.local_bound if kind == LOCAL else combinatorial.svetlichny_bound
        try:
            value = fn(expr, args.guard).value
        except GuardExceededError:
            if not args.skip_infeasible:
                raise
            value = "skipped"
        out.append([n, m, k, kind, EXACT, value])
    return out


def cmd_build(args: argparse.Namespace) -> Output:
    expr = resolve_expression(args)
    if args.expand:
        doc = expand(expr, args.guard).to_json()
    else:
        doc = expr.to_json()
    return Output(doc)


# --------------------------------------------------------------------------
# parser and dispatch


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--format", choices=("table", "json", "csv"), default=default(None),
                   help="output format (default: table; csv for the table command)")
    p.add_argument("--out", metavar="PATH", default=default(None), help="write output to PATH instead of stdout")
    p.add_argument("--guard", type=_positive_int, default=default(combinatorial.DEFAULT_ENUMERATION_GUARD),
                   help="maximum enumeration size before refusing (default: 1e8)")
    p.add_argument("--seed", type=int, default=default(0), help="random seed")


def _positive_int(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_scenario(p: argparse.ArgumentParser) -> None:
    p.add_argument("-n", type=int, help="number of parties")
    p.add_argument("-m", type=int, help="settings per party")
    p.add_argument("-k", type=int, help="outcomes per setting")
    p.add_argument("--f", default="fI", help="coefficient function: fI, mabk, cosine:D, g:v1,...,vm, file:PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fullcorr", description="Symmetric full-correlation Bell expressions and their bounds.")
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="compute local / Svetlichny / G-group / DIEW / Tsirelson bounds")
    _add_scenario(p)
    p.add_argument("--local", action="store_true")
    p.add_argument("--svetlichny", action="store_true")
    p.add_argument("--g-group", type=int, metavar="G")
    p.add_argument("--diew", action="store_true")
    p.add_argument("--tsirelson", action="store_true")
    p.add_argument("--all", action="store_true")
    p.add_argument("--bipartite-quantum", type=float, metavar="VALUE",
                   help="bipartite quantum lower bound fed to the party recursion")
    _add_global(p, suppress=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reduce-check", help="verify the relabelling onto BKP or Svetlichny-CGLMP form")
    p.add_argument("family", choices=("bkp", "svet-cglmp"))
    p.add_argument("-n", type=int)
    p.add_argument("-m", type=int)
    p.add_argument("-k", type=int)
    _add_global(p, suppress=True)
    p.set_defaults(func=cmd_reduce_check)

    p = sub.add_parser("ghz-opt", help="optimize GHZ measurement phases")
    _add_scenario(p)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--target", type=float, help="bound to report the gap against")
    p.add_argument("--angles-out", metavar="PATH", help="write the best angles as JSON")
    _add_global(p, suppress=True)
    p.set_defaults(func=cmd_ghz_opt)

    p = sub.add_parser("classify", help="evaluate an expression on a behavior file and compare with bounds")
    p.add_argument("behavior", help="behavior JSON file")
    _add_scenario(p)
    _add_global(p, suppress=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("table", help="CSV sweep of bounds for Omega over a grid of (n, m, k)")
    p.add_argument("--n", dest="n_range", default="2..4", metavar="RANGE")
    p.add_argument("--m", dest="m_range", default="2..3", metavar="RANGE")
    p.add_argument("--k", dest="k_range", default="2", metavar="RANGE")
    p.add_argument("--kinds", default="svetlichny,diew,tsirelson",
                   help="comma-separated subset of local, svetlichny, diew, tsirelson")
    p.add_argument("--exact", action="store_true", help="add enumerated local/Svetlichny values")
    p.add_argument("--skip-infeasible", action="store_true", help="mark cells beyond the guard as skipped")
    _add_global(p, suppress=True)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("build", help="emit an expression (or its expanded tensor) as JSON")
    _add_scenario(p)
    p.add_argument("--expand", action="store_true")
    _add_global(p, suppress=True)
    p.set_defaults(func=cmd_build)
    return parser


def render(out: Output, fmt: str) -> str:
    if fmt == "json":
        return jsonio.dumps(out.doc) + "\n"
    if fmt == "csv" and out.headers:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(out.headers)
        for row in out.rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
        return buf.getvalue()
    if not out.headers:
        return jsonio.dumps(out.doc) + "\n"
    cells = [out.headers] + [[_fmt(x) for x in row] for row in out.rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(out.headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines + out.notes) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or ("csv" if args.command == "table" else "table")
    try:
        out = args.func(args)
    except GuardExceededError as exc:
        print(f"error: resource guard exceeded ({exc}); raise it with --guard", file=sys.stderr)
        return EXIT_GUARD
    except VerificationError as exc:
        print(f"error: verification failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(out, fmt)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return out.exit_code


if __name__ == "__main__":
    sys.exit(main())

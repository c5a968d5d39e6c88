"""Command-line entry point: reproduce the polygon tables, the gbit bound and friends.

Exit codes: 0 when every check passes, 2 on a numeric mismatch, 3 on a
usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings

from .geometry import APPROX, EXACT, format_scalar, parse_rational

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_USAGE = 3

TABLE_TOL = 1e-4
CI_N_MAX = 13
FULL_N_MAX = 30

TABLE_COLUMNS = ["n", "kind", "optimum", "formula_value", "abs_diff", "problems_solved", "wall_time"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _default_jobs() -> int:
    env = os.environ.get("GPT_SELFTEST_JOBS")
    if not env:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[EXACT, APPROX], default=None)
    common.add_argument("--jobs", type=int, default=_default_jobs())
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="gptchsh", description="CHSH games in generalised probabilistic theories")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in [("table-odd", "CHSH optima for odd polygons under the maximal tensor product"),
                           ("table-selfdual", "CHSH optima for self-dualised even polygons")]:
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--n-max", type=int, required=True)
        s.add_argument("--full-range", action="store_true", help=f"allow n-max above {CI_N_MAX}")
        s.add_argument("--timing", action="store_true", help="fill the wall_time column")
        s.add_argument("--no-symmetry", action="store_true", help="sweep without fixing Alice's first measurement")

    s = sub.add_parser("gbit", parents=[common], help="exact adaptive-game bound for CH-restricted gbits")
    s.add_argument("--epsilon", type=_rational, action="append", required=True,
                   help="rational in [0, 1/8] as p/q; repeat for several values")
    s.add_argument("--prune", action="store_true")

    sub.add_parser("quantum", parents=[common], help="quantum reference strategy")

    s = sub.add_parser("figure2", parents=[common], help="plot data for self-dualised polygons")
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--full-range", action="store_true")
    s.add_argument("--curve-max", type=int, default=200, help="last n of the formula curve samples")

    s = sub.add_parser("classical-check", parents=[common], help="separable states never beat 3/4")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--system", choices=["gbit", "trit", "pentagon"], default="gbit")

    s = sub.add_parser("enumerate", parents=[common], help="convert a cone between H and V form")
    s.add_argument("--input", default="-", help="cone in text format; '-' for stdin")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_n_max(args, smallest: int) -> None:
    if args.n_max < smallest:
        raise UsageError(f"--n-max must be at least {smallest}")
    cap = FULL_N_MAX if args.full_range else CI_N_MAX
    if args.n_max > cap:
        raise UsageError(f"--n-max above {cap} needs --full-range" if not args.full_range
                         else f"--n-max is limited to {FULL_N_MAX}")


def _table_rows(kind: str, args):
    from .chsh import odd_polygon_formula, optimize_chsh, selfdual_polygon_formula
    from .composition import generalized_max_tensor, max_tensor
    from .systems import polygon_system, self_dualize

    rows = []
    if kind == "odd":
        ns = range(5, args.n_max + 1, 2)
    else:
        ns = range(4, args.n_max + 1, 2)
    for n in ns:
        if kind == "odd":
            s = polygon_system(n)
            joint = max_tensor(s, s)
            formula = odd_polygon_formula
            label = "odd_max_tp"
        else:
            s = self_dualize(polygon_system(n))
            joint = generalized_max_tensor(s, s)
            formula = selfdual_polygon_formula
            label = "selfdual_gen_max_tp"
        res = optimize_chsh(joint, reduce_symmetry=not getattr(args, "no_symmetry", False), jobs=args.jobs)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = formula(n)
        rows.append({"n": n, "kind": label, "optimum": float(res.optimum), "formula_value": f,
                     "abs_diff": abs(float(res.optimum) - f), "problems_solved": res.problems_solved,
                     "wall_time": res.wall_time})
    return rows


def _format_table(rows, fmt: str, timing: bool) -> str:
    def cell(k, v):
        if k == "wall_time":
            return f"{v:.3f}" if timing else ""
        return format_scalar(v) if isinstance(v, float) else str(v)

    if fmt == "json":
        out = [{k: (cell(k, v) if k != "n" and k != "problems_solved" else v) for k, v in r.items()} for r in rows]
        return json.dumps({"schema": 1, "rows": out}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        w.writerow([cell(k, r[k]) for k in TABLE_COLUMNS])
    return buf.getvalue()


def cmd_table(args, kind: str) -> int:
    if args.mode == EXACT:
        raise UsageError("polygon tables have irrational coordinates; use --mode approx")
    _check_n_max(args, 5 if kind == "odd" else 4)
    rows = _table_rows(kind, args)
    _emit(_format_table(rows, args.format or "csv", args.timing), args.out)
    bad = [r for r in rows if r["abs_diff"] > TABLE_TOL]
    for r in bad:
        print(f"mismatch at n={r['n']}: optimum {r['optimum']:.10g} vs formula {r['formula_value']:.10g}",
              file=sys.stderr)
    return EXIT_MISMATCH if bad else EXIT_OK


def cmd_gbit(args) -> int:
    from .game import gbit_report

    if args.mode == APPROX:
        raise UsageError("the gbit pipeline runs in exact mode only")
    reports = []
    for eps in args.epsilon:
        try:
            reports.append(gbit_report(eps, prune=args.prune))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if (args.format or "json") == "csv":
        keys = ["epsilon", "vertex_count", "ray_count", "ch_min", "ch_max", "p_win_upper", "p_win_lower",
                "matches_closed_form", "pruned"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in reports:
            w.writerow([r[k] for k in keys])
        text = buf.getvalue()
    else:
        text = json.dumps({"schema": 1, "reports": reports}, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    bad = [r for r in reports if not r["matches_closed_form"]]
    for r in bad:
        print(f"mismatch at epsilon={r['epsilon']}: witnesses {r['witness_min']} / {r['witness_max']}",
              file=sys.stderr)
    return EXIT_MISMATCH if bad else EXIT_OK


def cmd_quantum(args) -> int:
    from .game import BOB_OUTCOMES, conditional_table, outcome_probability, p_win, quantum_reference

    strat = quantum_reference()
    value = float(p_win(strat))
    target = 0.5 + 1 / (2 * math.sqrt(2))
    table = conditional_table(strat, (0, 0)).table()
    if (args.format or "csv") == "json":
        text = json.dumps({"schema": 1, "p_win": format_scalar(value),
                           "table_b00": [[format_scalar(float(v)) for v in row] for row in table],
                           "outcome_probabilities": [format_scalar(float(outcome_probability(strat, b)))
                                                     for b in BOB_OUTCOMES]},
                          indent=2, sort_keys=True) + "\n"
    else:
        lines = ["# P(a c | rA rC, b=(0,0)); rows 2*rA+a, columns 2*rC+c"]
        lines += [",".join(format_scalar(float(v)) for v in row) for row in table]
        lines.append(f"p_win,{format_scalar(value)}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if abs(value - target) <= 1e-9 else EXIT_MISMATCH


def cmd_figure2(args) -> int:
    from .chsh import TSIRELSON, selfdual_polygon_formula

    if args.mode == EXACT:
        raise UsageError("polygon tables have irrational coordinates; use --mode approx")
    _check_n_max(args, 4)
    rows = _table_rows("selfdual", args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "n", "value"])
    for r in rows:
        w.writerow(["lp", r["n"], format_scalar(r["optimum"])])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in range(4, max(args.curve_max, args.n_max) + 1, 2):
            w.writerow(["formula", n, format_scalar(selfdual_polygon_formula(n))])
    w.writerow(["limit", "inf", format_scalar(TSIRELSON)])
    _emit(buf.getvalue(), args.out)
    bad = [r for r in rows if r["abs_diff"] > TABLE_TOL or r["optimum"] > TSIRELSON + 1e-9]
    return EXIT_MISMATCH if bad else EXIT_OK


def cmd_classical(args) -> int:
    from .chsh import classical_bound_check
    from .systems import gbit_square, polygon_system, trit

    if args.samples < 1:
        raise UsageError("--samples must be positive")
    system = {"gbit": gbit_square, "trit": trit, "pentagon": lambda: polygon_system(5)}[args.system]()
    rep = classical_bound_check(args.samples, args.seed, system)
    payload = {"schema": 1, "system": rep.system, "samples": rep.samples, "seed": rep.seed,
               "max_win": format_scalar(rep.max_win), "violations": rep.violations,
               "decomposition_ok": bool(rep.decomposition_ok)}
    if (args.format or "json") == "csv":
        keys = list(payload)
        text = ",".join(keys) + "\n" + ",".join(str(payload[k]) for k in keys) + "\n"
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return EXIT_OK if rep.violations == 0 and rep.decomposition_ok else EXIT_MISMATCH


def cmd_enumerate(args) -> int:
    from .geometry import ConeH, ConeV, dualize, dumps, enumerate_rays, loads

    try:
        text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from exc
    try:
        cone = loads(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse cone: {exc}") from exc
    if args.mode and args.mode != cone.mode:
        cone = (ConeH(cone.inequalities, cone.dim, equalities=cone.equalities, mode=args.mode)
                if isinstance(cone, ConeH) else
                ConeV(cone.generators, cone.dim, lineality=cone.lineality, mode=args.mode))
    result = enumerate_rays(cone) if isinstance(cone, ConeH) else dualize(cone)
    _emit(dumps(result), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    handlers = {
        "table-odd": lambda a: cmd_table(a, "odd"),
        "table-selfdual": lambda a: cmd_table(a, "selfdual"),
        "gbit": cmd_gbit,
        "quantum": cmd_quantum,
        "figure2": cmd_figure2,
        "classical-check": cmd_classical,
        "enumerate": cmd_enumerate,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"gptchsh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

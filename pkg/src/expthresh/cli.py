"""Command-line front end.

Every command writes one JSON document (``schema: v1``) that embeds the
fully resolved configuration, so identical arguments give byte-identical
output.  ``check`` exits 0/1/2 for PASS/FAIL/INCONCLUSIVE; usage and
input errors exit 3.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import cliques, conditions, cover
from .core import Instance, InstanceFormatError, TooLarge, load_instance, members
from .report import SCHEMA, Verdict

EXIT_ERROR = 3
BIG_L = 2**12 * math.e**16


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def parse_L(text: str) -> float:
    """Accepts a number, ``<a>e`` for a multiple of e, or ``big`` for 2^12 e^16."""
    text = text.strip().lower()
    if text == "big":
        return BIG_L
    if text.endswith("e") and not text[:-1].endswith(("e", "-", "+")):
        head = text[:-1]
        return (float(head) if head else 1.0) * math.e
    return float(text)


def parse_grid(text: str) -> list:
    """``a:b`` (one point per decade), ``a:b:num`` (log-spaced) or ``a,b,c``."""
    if ":" in text:
        parts = text.split(":")
        lo, hi = float(parts[0]), float(parts[1])
        if len(parts) > 2:
            num = int(parts[2])
        else:
            num = int(round(math.log10(hi / lo))) + 1
        if num < 2:
            return [int(round(lo))]
        step = (math.log(hi) - math.log(lo)) / (num - 1)
        grid = [int(round(math.exp(math.log(lo) + i * step))) for i in range(num)]
        return sorted(set(grid))
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _envelope(command: str, config: dict, result) -> dict:
    return {"schema": SCHEMA, "command": command, "config": config, "result": result}


def _write(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load(args: argparse.Namespace) -> Instance:
    if getattr(args, "clique", None):
        nt, kt, l = args.clique
        if args.r is None:
            raise InstanceFormatError("--clique needs --r")
        return cliques.build_clique_instance(cliques.CliqueParams(nt, kt, l), Fraction(args.r))
    if not args.instance:
        raise InstanceFormatError("give --instance PATH or --clique NT KT L")
    inst = load_instance(Path(args.instance).read_text())
    if getattr(args, "r", None) is not None:
        inst = Instance(inst.n, inst.k, inst.edges, Fraction(args.r))
    return inst


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="instance JSON file")
    p.add_argument("--clique", nargs=3, type=int, metavar=("NT", "KT", "L"), help="clique hypergraph parameters")
    p.add_argument("--r", help="weight denominator r (overrides the file's)")


# --------------------------------------------------------------------------
# commands


def cmd_instance(args: argparse.Namespace) -> int:
    if args.edges:
        inst = load_instance(Path(args.edges).read_text())
        if args.r is not None:
            inst = Instance(inst.n, inst.k, inst.edges, Fraction(args.r))
    else:
        inst = _load(args)
    _write(inst.dumps(), args.out)
    return 0


def _sum_law(inst: Instance, s: int, args: argparse.Namespace):
    if args.law == "empirical":
        return conditions.sum_overlap_law(inst, s, args.trials, args.seed)
    if args.law == "exact" or inst.d**s <= conditions.EXACT_SUM_LIMIT:
        return conditions.exact_sum_overlap_law(inst, s)
    return conditions.sum_overlap_law(inst, s, args.trials, args.seed)


def cmd_check(args: argparse.Namespace) -> int:
    inst = _load(args)
    L = parse_L(args.L)
    extra = {}
    if args.thm == "two":
        if args.law == "empirical":
            law = conditions.sum_overlap_law(inst, 2, args.trials, args.seed)
        else:
            law = conditions.pair_overlap_law(inst)
        report = conditions.check_thm_two(inst, law, L)
        if inst.r.denominator == 1:
            try:
                weights = conditions.explicit_cover_weights(inst, L, exact=args.mode == "exact")
                extra["explicit_cover"] = weights.to_json()
            except TooLarge as exc:
                extra["explicit_cover"] = {"skipped": str(exc)}
    else:
        t = cover.default_t(inst, args.s)
        law = _sum_law(inst, args.s, args)
        report = conditions.check_thm_one(inst, law, args.s, L, t=t)
        report.params["t"] = t
    doc = report.to_json()
    doc["law"] = law.to_json()
    doc.update(extra)
    _write(_dump(_envelope("check", _config(args), doc)), args.out)
    return report.verdict.exit_code


def cmd_cover(args: argparse.Namespace) -> int:
    inst = _load(args)
    L = parse_L(args.L)
    defaults = cover.CoverParams.default(inst, L, args.seed)
    s = args.s if args.s is not None else defaults.s
    t = args.t if args.t is not None else cover.default_t(inst, s)
    params = cover.CoverParams(s, t, L, args.seed)
    result = {"resolved": params.to_json(), "p": inst.p, "warnings": inst.assumption_warnings(L)}
    analytic_only = t > cover.T_CAP
    result["analytic_only"] = analytic_only
    coverage = None
    if inst.n <= 24:
        cov = cover.coverage_probability(inst, params, args.trials)
        result["coverage"] = cov.to_json()
        coverage = cov.estimate
    else:
        result["coverage"] = {"skipped": "n > 24: exact cover checks unavailable"}
    weight = cover.expected_cover_weight(inst, params, args.trials, coverage=coverage or None)
    result["expected_weight"] = weight.to_json()
    if not analytic_only and inst.n <= 24:
        result["transfer"] = cover.conditional_weight_experiment(inst, params, args.trials).to_json()
    if args.trace_out:
        if analytic_only:
            result["trace_out"] = "skipped: t too large to materialize"
        else:
            sample = cover.sample_cover(inst, params)
            lines = (
                json.dumps({"i": i, "union": members(u), "size": z, "y": list(ys)}, sort_keys=True)
                for i, (u, z, ys) in enumerate(zip(sample.union_list, sample.sizes, sample.y_traces))
            )
            Path(args.trace_out).write_text("".join(line + "\n" for line in lines))
    _write(_dump(_envelope("cover", _config(args), result)), args.out)
    return 0


def cmd_s1(args: argparse.Namespace) -> int:
    inst = _load(args)
    L = parse_L(args.L)
    report, sample = cover.s1_construction(inst, parse_L(args.c), L, m_mode=args.m_mode, seed=args.seed)
    doc = report.to_json()
    doc["cover_size"] = None if sample is None else len(sample.unions)
    _write(_dump(_envelope("s1", _config(args), doc)), args.out)
    return report.verdict.exit_code


def cmd_pairs(args: argparse.Namespace) -> int:
    if args.clique and not args.materialize:
        law = cliques.exact_pair_law_cliques(cliques.CliqueParams(*args.clique))
    else:
        law = conditions.pair_overlap_law(_load(args))
    _write(_dump(_envelope("pairs", _config(args), law.to_json())), args.out)
    return 0


def cmd_chain(args: argparse.Namespace) -> int:
    chain = cliques.vertex_union_chain(cliques.CliqueParams(*args.clique), args.s)
    _write(_dump(_envelope("chain", _config(args), chain.to_json())), args.out)
    return 0


def cmd_regimes(args: argparse.Namespace) -> int:
    L = parse_L(args.L)
    grid = parse_grid(args.n_grid)
    res = cliques.scan_grid(grid, args.kt, args.l, L, args.points)
    scans = res["scans"]
    summary = {
        "min_gap_free_nt": res["min_gap_free_nt"],
        "gap_nts": res["gap_nts"],
        "status": "vacuous" if res["all_vacuous"] else ("gaps" if res["gap_nts"] else "covered"),
        "per_nt": [s.summary() for s in scans],
        "comparison": [s.comparison.to_json() for s in scans],
    }
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["nt", "r", "lemma52_case1", "lemma52_case2", "lemma53", "covered"])
        for scan in scans:
            for row in scan.rows:
                writer.writerow(
                    [
                        scan.params.nt,
                        f"{math.exp(row['log_r']):.10g}" if row["log_r"] < 700 else f"exp({row['log_r']:.10g})",
                        int(row["lemma52_case1"]),
                        int(row["lemma52_case2"]),
                        int(row["lemma53"]),
                        int(row["covered"]),
                    ]
                )
        Path(args.csv).write_text(buf.getvalue())
    if args.emit_plot_data:
        series = [
            {
                "nt": scan.params.nt,
                "log_r": [row["log_r"] for row in scan.rows],
                "margin_lower": [row["margin_lower"] for row in scan.rows],
                "margin_upper": [row["margin_upper"] for row in scan.rows],
            }
            for scan in scans
        ]
        Path(args.emit_plot_data).write_text(_dump({"schema": SCHEMA, "series": series}))
    _write(_dump(_envelope("regimes", _config(args), summary)), args.out)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="expthresh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("instance", help="write a canonical instance file")
    _add_instance_args(p)
    p.add_argument("--edges", help="instance JSON to canonicalize")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_instance)

    p = sub.add_parser("check", help="evaluate a sufficient condition")
    _add_instance_args(p)
    p.add_argument("--thm", choices=["one", "two"], required=True, help="one: overlap sums; two: pair overlaps")
    p.add_argument("--L", default="2e", help="scaling constant (number, '2e', 'big')")
    p.add_argument("--s", type=int, default=2, help="edges per union (thm one)")
    p.add_argument("--law", choices=["auto", "exact", "empirical"], default="auto")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["log", "exact"], default="log", help="arithmetic for cover weights")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("cover", help="Monte Carlo random-cover run")
    _add_instance_args(p)
    p.add_argument("--s", type=int, help="edges per union (default ceil(ln n / k))")
    p.add_argument("--t", type=int, help="number of unions (default ceil(p^-sk n))")
    p.add_argument("--L", default="2e")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-out", help="JSON-lines file with one sampled cover's traces")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("s1", help="single-edge cover construction")
    _add_instance_args(p)
    p.add_argument("--c", default="e", help="base c > 1")
    p.add_argument("--L", default="2e")
    p.add_argument("--m-mode", choices=["exact", "bound"], default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_s1)

    p = sub.add_parser("pairs", help="exact pair-overlap law")
    _add_instance_args(p)
    p.add_argument("--materialize", action="store_true", help="enumerate pairs even for cliques")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("chain", help="exact vertex-union chain for cliques")
    p.add_argument("--clique", nargs=3, type=int, metavar=("NT", "KT", "L"), required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("regimes", help="scan the r-regimes for clique hypergraphs")
    p.add_argument("--n-grid", required=True, help="'1e3:1e6', '1e3:1e9:13' or '100,1000'")
    p.add_argument("--kt", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--L", default="big")
    p.add_argument("--points", type=int, default=33, help="r grid points per nt")
    p.add_argument("--csv")
    p.add_argument("--emit-plot-data", help="write (log r, margin) series as JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_regimes)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceFormatError, TooLarge, ValueError, OSError) as exc:
        print(f"expthresh {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

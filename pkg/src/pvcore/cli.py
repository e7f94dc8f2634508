"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 on data errors. Results go to
stdout as line-delimited JSON or CSV (``--format``); diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import harness
from .harness import load_config
from .profile import ProfileError, read_profile
from .pvc import critical_epsilon, epsilon_pvc, max_blocking_slack
from .querysim import OracleEnvironment, find_epsilon_pvc_element
from .rules import RULES, run_rule


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _emit_json(rows, out):
    for row in rows:
        out.write(json.dumps(row) + "\n")


def _emit(rows, fmt, out):
    if fmt == "json":
        _emit_json(rows, out)
    else:
        flat = [{k: _csv_cell(v) for k, v in row.items()} for row in rows]
        out.write(harness.to_csv(flat))


def _csv_cell(v):
    if isinstance(v, (list, tuple)):
        return " ".join(map(str, v))
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return v


def _load(args):
    p = read_profile(args.profile)
    d = harness.resolve_distribution(args.dist, p.m)
    return p, d


def cmd_parse(args, out):
    p = read_profile(args.profile)
    rows = [
        {"count": c, "ranking": list(r)} for r, c in p.ballot_counts().items()
    ]
    if args.format == "json":
        _emit_json([{"n": p.n, "m": p.m, "ballots": rows}], out)
    else:
        _emit(rows, "csv", out)


def cmd_critical_epsilon(args, out):
    p, d = _load(args)
    alts = range(p.m) if args.all or args.alt is None else [args.alt]
    solve = max_blocking_slack if args.method == "brute-force" else critical_epsilon
    rows = []
    for a in alts:
        res = solve(p, d, a)
        row = {"alt": a, "critical_epsilon": str(res.value)}
        if args.witness:
            w = res.witness
            row["witness"] = None if w is None else w.to_json()
        rows.append(row)
    _emit(rows, args.format, out)


def cmd_pvc(args, out):
    p, d = _load(args)
    core = sorted(epsilon_pvc(p, d, args.epsilon))
    if args.format == "json":
        _emit_json([{"pvc": core}], out)
    else:
        _emit([{"alt": a} for a in core], "csv", out)


def cmd_vote(args, out):
    p = read_profile(args.profile)
    outcome = run_rule(args.rule, p, seed=args.seed)
    _emit([outcome.to_json(trace=args.trace)], args.format, out)


def cmd_simulate(args, out):
    p, d = _load(args)
    crit = {}
    rows = []
    hits = 0
    for run in range(args.runs):
        env = OracleEnvironment(p, d, seed=harness.derive_seed(args.seed, 0, run))
        res = find_epsilon_pvc_element(
            env, args.epsilon, args.delta, args.mode, seed=harness.derive_seed(args.seed, 1, run)
        )
        if res.survivor not in crit:
            crit[res.survivor] = critical_epsilon(p, d, res.survivor).value
        value = crit[res.survivor]
        inside = value <= args.epsilon
        hits += inside
        rows.append(
            {
                "run": run,
                "survivor": res.survivor,
                "critical_epsilon": str(value),
                "in_eps_pvc": inside,
                "trace": res.trace.to_json(),
            }
        )
    summary = {
        "summary": True,
        "runs": args.runs,
        "in_eps_pvc": hits,
        "failure_rate": (args.runs - hits) / args.runs if args.runs else 0.0,
    }
    if args.format == "json":
        _emit_json(rows + [summary], out)
    else:
        _emit(rows, "csv", out)


def cmd_experiment(args, out):
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    records = harness.run_experiment(cfg)
    summaries = harness.write_outputs(records, args.out)
    _emit(harness.summary_rows(summaries), args.format, out)


def cmd_aggregate(args, out):
    records = harness.read_records(args.records)
    if args.out:
        summaries = harness.write_outputs(records, args.out)
    else:
        summaries = harness.aggregate(records)
    _emit(harness.summary_rows(summaries), args.format, out)


def cmd_insert_eval(args, out):
    p, d = _load(args)
    ins = harness.read_insertion(args.insertion)
    res = harness.evaluate_insertion(p, d, ins)
    row = {"label": ins.label, "alt": res.alternative, "critical_epsilon": str(res.value)}
    if args.witness:
        row["witness"] = None if res.witness is None else res.witness.to_json()
    _emit([row], args.format, out)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="pvcore", description="Proportional veto core toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_profile(sp, dist=True):
        sp.add_argument("--profile", required=True, help="strict-order ballot file")
        if dist:
            sp.add_argument(
                "--dist", default="uniform", help="'uniform', weight file, or 'btl:<utility csv>'"
            )

    sp = sub.add_parser("parse", parents=[common], help="validate and summarize a ballot file")
    with_profile(sp, dist=False)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("critical-epsilon", parents=[common], help="critical epsilon per alternative")
    with_profile(sp)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--alt", type=int)
    group.add_argument("--all", action="store_true")
    sp.add_argument("--witness", action="store_true")
    sp.add_argument("--method", choices=("flow", "brute-force"), default="flow")
    sp.set_defaults(func=cmd_critical_epsilon)

    sp = sub.add_parser("pvc", parents=[common], help="the epsilon-PVC")
    with_profile(sp)
    sp.add_argument("--epsilon", type=_fraction, default=Fraction(0))
    sp.set_defaults(func=cmd_pvc)

    sp = sub.add_parser("vote", parents=[common], help="run a voting rule")
    with_profile(sp, dist=False)
    sp.add_argument("--rule", required=True, choices=RULES + ("veto",))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_vote)

    sp = sub.add_parser("simulate", parents=[common], help="query-based search for a PVC element")
    with_profile(sp)
    sp.add_argument("--epsilon", type=_fraction, required=True)
    sp.add_argument("--delta", type=_fraction, required=True)
    sp.add_argument("--mode", choices=("min", "pairwise"), default="min")
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("experiment", parents=[common], help="run a subsampling experiment")
    sp.add_argument("--config", required=True, help="JSON experiment config")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("aggregate", parents=[common], help="summarize records.jsonl")
    sp.add_argument("--records", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_aggregate)

    sp = sub.add_parser("insert-eval", parents=[common], help="score an inserted zero-weight statement")
    with_profile(sp)
    sp.add_argument("--insertion", required=True)
    sp.add_argument("--witness", action="store_true")
    sp.set_defaults(func=cmd_insert_eval)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ProfileError, ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

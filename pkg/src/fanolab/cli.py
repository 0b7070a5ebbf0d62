"""Command line interface.

Subcommands: flow run, bergman scan, lct eval, lct table2,
criteria check, report summarize.  Outputs that feed other tools are
JSON on stdout; run products land in a run directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .criteria import check_alphag, check_nuconv, check_nuconvr
from .errors import FanolabError, InconclusiveBracket, IrrationalCenter
from .experiment import ExperimentConfig, reproduce_table2, run_experiment
from .lct import lct, lct_numeric_oracle, parse_germ


def _load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_json(Path(path).read_text())


def _cmd_flow_run(args) -> int:
    cfg = _load_config(args.config)
    out = run_experiment(cfg, args.out)
    print(out)
    return 0


def _cmd_bergman_scan(args) -> int:
    cfg = _load_config(args.config)
    cfg.monitors = {"functionals": False, "bergman": True}
    out = run_experiment(cfg, args.out)
    print(out / "bergman.csv")
    return 0


def _germ_from_args(text, weight_args):
    weights = {}
    for spec in weight_args or ():
        axis, _, mult = spec.partition(":")
        weights[axis.strip()] = int(mult)
    return parse_germ(text, weights=weights)


def _eval_one(text, weight_args, method) -> dict:
    germ = _germ_from_args(text, weight_args)
    try:
        result = lct(germ, method=method)
    except IrrationalCenter as exc:
        upper = min((v for v, _ in exc.candidates), default=None)
        bracket = lct_numeric_oracle(germ)
        hi = min(float(upper), bracket.hi) if upper is not None \
            else bracket.hi
        return {"germ": text, "value_num": None, "value_den": None,
                "method": "oracle-bracket",
                "bracket": [bracket.lo, hi],
                "witness": {"kind": "irrational-center"}}
    out = {"germ": text, "method": result.method, "witness": result.witness}
    if result.infinite:
        out["value_num"] = None
        out["value_den"] = None
        out["infinite"] = True
    elif result.value is not None:
        out["value_num"] = result.value.numerator
        out["value_den"] = result.value.denominator
    else:
        out["value_num"] = None
        out["value_den"] = None
        out["bracket"] = list(result.bracket)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "numerator") and hasattr(obj, "denominator") \
            and not isinstance(obj, (int, bool)):
        return str(obj)
    return obj


def _cmd_lct_eval(args) -> int:
    if args.batch:
        rows = []
        for line in Path(args.batch).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append(_eval_one(line, args.weights, args.method))
        print(json.dumps(_jsonable(rows), indent=2))
        return 0
    if not args.germ:
        print("error: provide a germ or --batch FILE", file=sys.stderr)
        return 2
    try:
        out = _eval_one(args.germ, args.weights, args.method)
    except InconclusiveBracket as exc:
        print(json.dumps({"germ": args.germ, "error": str(exc)}))
        return 1
    print(json.dumps(_jsonable(out), indent=2))
    return 0


def _cmd_lct_table2(args) -> int:
    report = reproduce_table2()
    width = max(len(r.name) for r in report.rows)
    for r in report.rows:
        newton = "-" if r.newton is None else str(r.newton)
        status = "ok" if r.match else "MISMATCH"
        print(f"{r.name:<{width}}  {r.equation:<18} expected={r.expected} "
              f"newton={newton} resolution={r.resolution}  {status}")
    print(f"{'all rows match' if report.all_match else 'MISMATCHES FOUND'}")
    return 0 if report.all_match else 1


def _cmd_criteria_check(args) -> int:
    if args.theorem == "alphag":
        verdict = check_alphag(args.n, args.alpha1)
    elif args.alpha2 is not None and args.theorem in ("auto", "nuconvr"):
        verdict = check_nuconvr(args.n, args.alpha1, args.alpha2)
    elif args.theorem == "nuconvr":
        print("error: nuconvr needs --alpha2", file=sys.stderr)
        return 2
    else:
        verdict = check_nuconv(args.n, args.alpha1)
    print(json.dumps(verdict.as_dict(), indent=2))
    return 0


def _cmd_report_summarize(args) -> int:
    rundir = Path(args.rundir)
    summary = json.loads((rundir / "summary.json").read_text())
    manifest = json.loads((rundir / "MANIFEST.json").read_text())
    print(f"run: {rundir}")
    print(f"code version: {manifest['code_version']}, "
          f"conventions: {manifest['conventions_sha256'][:12]}")
    print(f"termination: {summary.get('termination')}")
    print(f"decay rate: {summary.get('decay_rate')}")
    tamed = summary.get("tamed", {})
    print(f"tamed: {tamed.get('bounded')}  per-nu: {tamed.get('per_nu')}")
    print(f"defect bound: {summary.get('defect_bound')}")
    for name, data in (summary.get("inequalities") or {}).items():
        print(f"inequality {name}: constant={data['constant']:.6g} "
              f"bounded={data['bounded']}")
    eq = summary.get("equivalence") or {}
    if eq:
        print("equivalence verdicts:", eq)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanolab",
        description="flow runs, section-density scans, exact local "
                    "thresholds, convergence criteria")
    sub = parser.add_subparsers(dest="command", required=True)

    p_flow = sub.add_parser("flow", help="flow integration")
    flow_sub = p_flow.add_subparsers(dest="subcommand", required=True)
    p_run = flow_sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.set_defaults(func=_cmd_flow_run)

    p_berg = sub.add_parser("bergman", help="density of states scans")
    berg_sub = p_berg.add_subparsers(dest="subcommand", required=True)
    p_scan = berg_sub.add_parser("scan", help="run and emit the scan CSV")
    p_scan.add_argument("--config", required=True)
    p_scan.add_argument("--out", required=True)
    p_scan.set_defaults(func=_cmd_bergman_scan)

    p_lct = sub.add_parser("lct", help="local threshold engines")
    lct_sub = p_lct.add_subparsers(dest="subcommand", required=True)
    p_eval = lct_sub.add_parser("eval", help="evaluate one germ or a batch")
    p_eval.add_argument("germ", nargs="?")
    p_eval.add_argument("--weights", action="append",
                        metavar="AXIS:MULT")
    p_eval.add_argument("--method", default="auto",
                        choices=("auto", "newton", "resolution", "oracle"))
    p_eval.add_argument("--batch", help="line-delimited germ file")
    p_eval.set_defaults(func=_cmd_lct_eval)
    p_table = lct_sub.add_parser("table2",
                                 help="reproduce the reference table")
    p_table.set_defaults(func=_cmd_lct_table2)

    p_crit = sub.add_parser("criteria", help="convergence criteria")
    crit_sub = p_crit.add_subparsers(dest="subcommand", required=True)
    p_check = crit_sub.add_parser("check")
    p_check.add_argument("--n", type=int, required=True)
    p_check.add_argument("--alpha1", required=True)
    p_check.add_argument("--alpha2")
    p_check.add_argument("--theorem", default="auto",
                         choices=("auto", "nuconv", "nuconvr", "alphag"))
    p_check.set_defaults(func=_cmd_criteria_check)

    p_rep = sub.add_parser("report", help="run directory reports")
    rep_sub = p_rep.add_subparsers(dest="subcommand", required=True)
    p_sum = rep_sub.add_parser("summarize")
    p_sum.add_argument("rundir")
    p_sum.set_defaults(func=_cmd_report_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FanolabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

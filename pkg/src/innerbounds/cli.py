"""Command-line front end: ``innerbounds {eval,optimize,fuzz,audit}``.

Exit codes: 0 success (and a clean fuzz run), 1 a verified violation of a
derived bound during fuzzing, 2 usage, parse or I/O errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from .bounds import BoundError, Form, evaluate_ladder, slack_tol
from .exponents import BRANCHES, ExponentError, HolderParams, validate
from .optimizer import OptimConfig, OptimError, Scope, Target, dense_scan, log_grid, optimize
from .serialize import FormatError, dumps_json, emit_tabular, params_to_dict, read_instance
from .verify import Distribution, FuzzConfig, audit_printed_forms, fuzz

DENSE_RTOL = 1e-6
DENSE_POINTS = 400


class UsageError(Exception):
    """Bad flag combination detected after argparse."""


# -- helpers ------------------------------------------------------------------


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load(path: str):
    try:
        text = _read_text(path)
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8 ({exc.reason})") from None
    try:
        return read_instance(text)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _emit(args, doc: Dict[str, Any], rows: List[Dict[str, Any]]) -> None:
    _write_text(args.out, emit_tabular(rows) if args.format == "tabular" else dumps_json(doc))


def _param_row(params: Optional[HolderParams]) -> Dict[str, Any]:
    if params is None:
        return {}
    return params.as_dict()


def _row(name: str, value: float, lhs: Optional[float], branch=None, form: Optional[str] = None,
         params: Optional[HolderParams] = None) -> Dict[str, Any]:
    row = {"name": name, "branch": branch, "form": form, "value": value, "lhs": lhs,
           "slack": None if lhs is None else value - lhs,
           "tightness": None if lhs is None or lhs <= 0 else value / lhs}
    row.update(_param_row(params))
    return row


# -- eval ---------------------------------------------------------------------


def _eval_params(args, embedded: Optional[HolderParams]) -> HolderParams:
    def pick(flag, attr):
        if flag is not None:
            return flag
        if embedded is not None:
            pair = getattr(embedded, attr)
            if pair is not None:
                return pair.p
        return 2.0

    return HolderParams.make(pick(args.p, "pq"), pick(args.alpha, "ab"), pick(args.gamma, "gd"))


def cmd_eval(args) -> int:
    inst, embedded, _ = _load(args.instance)
    if inst.c is None:
        raise FormatError(f"{args.instance}: missing field 'c' (coefficients are required for eval)")
    params = _eval_params(args, embedded)
    for b in BRANCHES:
        problems = validate(params, b, strict=False)
        if problems:
            raise ExponentError("; ".join(problems))
    ladder = evaluate_ladder(inst, params, printed=args.printed)
    keep = None if args.branch == "all" else int(args.branch)
    bounds, rows = [], []
    for b in ladder.bounds:
        if keep is not None and b.branch is not None and b.branch != keep:
            continue
        lhs = ladder.lhs.get(b.bounds) if b.bounds else None
        slack = None if lhs is None else b.value - lhs
        entry = {"name": b.name, "value": b.value, "form": b.form.value, "branch": b.branch, "bounds": b.bounds,
                 "slack": slack, "holds": None if lhs is None else slack >= -slack_tol(b.value),
                 "params": None if b.params is None else params_to_dict(b.params)}
        bounds.append(entry)
        rows.append(_row(b.name, b.value, lhs, b.branch, b.form.value, b.params))
    for name, value in ladder.lhs.items():
        rows.append(_row(name, value, None))
    report = {"kind": "eval_report", "instance": os.path.basename(args.instance),
              "params": params_to_dict(params), "lhs": ladder.lhs, "bounds": bounds, "notes": ladder.notes}
    _emit(args, report, rows)
    return 0


# -- optimize -----------------------------------------------------------------


def cmd_optimize(args) -> int:
    inst, _, _ = _load(args.instance)
    config = OptimConfig(p_grid=log_grid(args.p_grid_points), secondary_grid=log_grid(args.secondary_grid_points),
                         refine_iters=args.refine_iters, target=Target(args.target),
                         objective_scope=Scope(args.scope))
    res = optimize(inst, config)
    report: Dict[str, Any] = {"kind": "optimize_report", "instance": os.path.basename(args.instance),
                              "config": config.as_dict(), "result": res.as_dict()}
    b = None if res.best_branch is None else res.best_branch.index
    rows = [_row(f"{config.target.value}_optimized", res.best_value, res.lhs, b, Form.DERIVED.value,
                 res.best_params)]
    if args.dense_grid:
        d = dense_scan(inst, config.target, config.objective_scope, DENSE_POINTS)
        rel = abs(d.value - res.best_value) / max(abs(d.value), abs(res.best_value), 1e-300)
        report["dense_grid"] = {"points": DENSE_POINTS, "value": d.value, "scan_value": d.scan_value, "p": d.p,
                                "alpha": d.alpha, "gamma": d.gamma, "branch": d.branch, "rel_diff": rel,
                                "agrees": rel <= DENSE_RTOL}
        dp = HolderParams.make(d.p, d.alpha, d.gamma)
        rows.append(_row(f"{config.target.value}_dense", d.value, res.lhs, d.branch, Form.DERIVED.value, dp))
    if res.flagged:
        print(f"warning: {res.skipped_fraction:.2%} of parameter points overflowed and were skipped",
              file=sys.stderr)
    _emit(args, report, rows)
    return 0


# -- fuzz ---------------------------------------------------------------------


def _fuzz_config(args) -> FuzzConfig:
    try:
        return FuzzConfig(seed=args.seed, instances=args.instances, distribution=Distribution(args.distribution),
                          pq_samples=args.pq_samples, include_gram_direct=args.gram_direct,
                          n_range=(1, args.max_n), d_range=(1, args.max_d))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_fuzz(args) -> int:
    config = _fuzz_config(args)
    summary = fuzz(config)
    doc = summary.as_dict()
    # tabular: one row per chain link, value = smallest relative slack seen
    rows = [{"name": name, "value": doc["link_min_rel_slack"][name], "slack": doc["link_min_slack"][name]}
            for name in doc["link_min_slack"]]
    _emit(args, doc, rows)
    if summary.violations:
        sample = summary.violation_samples[0]
        inst_doc = dict(sample["instance"])
        inst_doc["params"] = sample["params"]
        path = _sibling(args.out, "counterexample.json")
        _write_text(path, dumps_json(inst_doc))
        print(f"{summary.violations} violation(s) of derived bounds; first ({sample['check']}) "
              f"written to {path}", file=sys.stderr)
        return 1
    return 0


def _sibling(out: Optional[str], suffix: str) -> str:
    if out is None or out == "-":
        return suffix
    stem, _ = os.path.splitext(out)
    return f"{stem}.{suffix}"


# -- audit --------------------------------------------------------------------


def cmd_audit(args) -> int:
    config = _fuzz_config(args)
    report = audit_printed_forms(config)
    doc = report.as_dict()
    cx_dir = args.counterexample_dir or _sibling(args.out, "counterexamples")
    files = []
    for row in report.rows:
        if row.worst is not None and row.violations > 0:
            name = f"{row.source}_branch{row.branch}.json"
            _write_text(os.path.join(cx_dir, name), dumps_json(row.worst))
            files.append(name)
    doc["counterexample_files"] = files
    # tabular: one row per typeset branch, value = worst relative margin over the middle term
    rows = [{"name": f"{r['source']}_branch{r['branch']}", "branch": r["branch"], "form": Form.PRINTED.value,
             "value": r["worst_margin"], "slack": r["worst_margin"]} for r in doc["rows"]]
    _emit(args, doc, rows)
    return 0


# -- parser -------------------------------------------------------------------


def _branch_flag(text: str) -> str:
    if text == "all" or (text.isdigit() and 1 <= int(text) <= 9):
        return text
    raise argparse.ArgumentTypeError(f"expected 1..9 or 'all', got {text!r}")


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer: {text!r}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="innerbounds",
                                     description="Evaluate, optimize and fuzz-check bounds on |sum c_i (x, y_i)|^2.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_out(p):
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=("structured", "tabular"), default="structured")

    p = sub.add_parser("eval", help="evaluate the full bound ladder for one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--p", type=_finite, default=None)
    p.add_argument("--alpha", type=_finite, default=None)
    p.add_argument("--gamma", type=_finite, default=None)
    p.add_argument("--branch", type=_branch_flag, default="all")
    p.add_argument("--printed", action="store_true", help="also report the branch formulas as typeset")
    common_out(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="choose exponents minimizing a bound family")
    p.add_argument("--instance", required=True)
    p.add_argument("--target", choices=[t.value for t in Target], default=Target.THM31.value)
    p.add_argument("--scope", choices=[s.value for s in Scope], default=Scope.BEST_OF_ALL.value)
    p.add_argument("--p-grid-points", type=int, default=40)
    p.add_argument("--secondary-grid-points", type=int, default=20)
    p.add_argument("--refine-iters", type=_count, default=32)
    p.add_argument("--dense-grid", action="store_true", help=f"cross-check against a {DENSE_POINTS}-point scan")
    common_out(p)
    p.set_defaults(func=cmd_optimize)

    for name, helptext, default_n, func in (
            ("fuzz", "randomized check of every inequality chain", 10_000, cmd_fuzz),
            ("audit", "test the typeset branch formulas against what they claim to bound", 1_000, cmd_audit)):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--seed", type=_u64, default=0)
        p.add_argument("--instances", type=_count, default=default_n)
        p.add_argument("--pq-samples", type=int, default=5)
        p.add_argument("--distribution", choices=[d.value for d in Distribution],
                       default=Distribution.UNIT_DISK_UNIFORM.value)
        p.add_argument("--gram-direct", action="store_true", help="also draw raw Hermitian Gram matrices")
        p.add_argument("--max-n", type=int, default=8)
        p.add_argument("--max-d", type=int, default=8)
        p.add_argument("--out", default=f"{name}_report.json" if name == "audit" else "fuzz_summary.json")
        p.add_argument("--format", choices=("structured", "tabular"), default="structured")
        if name == "audit":
            p.add_argument("--counterexample-dir", default=None)
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ExponentError, OptimError, BoundError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

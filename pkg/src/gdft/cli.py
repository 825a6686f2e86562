"""Command-line front end: ``gdft dft``, ``gdft verify``, ``gdft bench``.

Exit codes: 0 success, 1 verification failure, 2 malformed input,
3 size cap exceeded or reduction not applicable, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .catalog import CATALOGS
from .dft import OpCounter, naive_dft
from .groups import GroupError
from .io import SpecError, group_from_spec, read_alpha, write_blocks
from .planner import STRATEGIES, PlanConfig, dump_plan, execute_plan, make_plan
from .reductions import LabelingError
from .reps import IrrepError, compute_irreps

log = logging.getLogger("gdft")

NUMERICAL_ERRORS = (IrrepError, LabelingError, np.linalg.LinAlgError, ArithmeticError)

VERIFY_TOL = 1e-6
BENCH_COLUMNS = ["group", "label", "order", "strategy", "cmul", "cadd", "ms", "residual", "error"]

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 1, 2, 3, 4


def _config(args, strategy: str | None = None) -> PlanConfig:
    return PlanConfig(base_order=args.base_order, epsilon=args.epsilon,
                      strategy=strategy or getattr(args, "strategy", "auto"), seed=args.seed)


def _relative_residual(F, ref, alpha) -> float:
    scale = max(float(np.abs(alpha).sum()), np.finfo(float).tiny)
    return float(max(F.residuals(ref), default=0.0)) / scale


def _write_trace(path: str | None, counter: OpCounter, plan) -> None:
    if not path:
        return
    obj = {"mul": counter.mul, "add": counter.add, "calls": dict(counter.calls),
           "tags": {k: {"mul": v[0], "add": v[1]} for k, v in counter.tags.items()},
           "events": counter.events, "plan": plan.to_dict() if plan is not None else None}
    Path(path).write_text(json.dumps(obj, indent=2))


def cmd_dft(args) -> int:
    G = group_from_spec(args.group)
    alpha = read_alpha(args.alpha, G.order)
    cfg = _config(args)
    if args.plan:
        try:
            forced = json.loads(Path(args.plan).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read plan file {args.plan}: {exc}") from exc
        plan = make_plan(G, cfg, forced=forced)
    else:
        plan = make_plan(G, cfg)
    if args.dump_plan:
        Path(args.dump_plan).write_text(dump_plan(plan))
    counter = OpCounter()
    F = execute_plan(plan, alpha, counter)
    if args.out:
        write_blocks(F, args.out, G)
    else:
        json.dump({"group": G.label, "order": G.order, **F.to_json()}, sys.stdout)
        sys.stdout.write("\n")
    _write_trace(args.trace, counter, plan)
    log.info("%s via %s: %d mults, %d adds", G.label, plan.kind, counter.mul, counter.add)
    return EXIT_OK


def cmd_verify(args) -> int:
    G = group_from_spec(args.group)
    irreps = compute_irreps(G, seed=args.seed)
    requested = args.strategies.split(",") if args.strategies else list(STRATEGIES)
    explicit = bool(args.strategies)
    worst = (0.0, None)
    for st in requested:
        if st not in STRATEGIES:
            raise SpecError(f"unknown strategy {st!r}")
        try:
            plan = make_plan(G, _config(args, st), irreps=irreps)
        except GroupError as exc:
            if explicit:
                raise
            print(f"{G.label:12s} {st:7s} not applicable ({exc})")
            continue
        res = 0.0
        for k in range(args.seeds):
            alpha = read_alpha(f"random:{args.seed + k}", G.order)
            F = execute_plan(plan, alpha)
            res = max(res, _relative_residual(F, naive_dft(alpha, irreps), alpha))
        status = "pass" if res <= VERIFY_TOL else "FAIL"
        print(f"{G.label:12s} {st:7s} ({plan.kind:7s}) max residual {res:.3e}  {status}")
        if res > worst[0]:
            worst = (res, st)
    if worst[0] > VERIFY_TOL:
        print(f"worst offender: strategy {worst[1]} with residual {worst[0]:.3e}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _bench_rows(spec: str, strategies: list[str], args) -> list[dict]:
    rows = []
    try:
        G = group_from_spec(spec)
        irreps = compute_irreps(G, seed=args.seed)
    except Exception as exc:
        return [{"group": spec, "label": "", "order": "", "strategy": "", "cmul": "", "cadd": "",
                 "ms": "", "residual": "", "error": f"{type(exc).__name__}: {exc}"}]
    alpha = read_alpha(f"random:{args.seed}", G.order)
    counter = OpCounter()
    t0 = time.perf_counter()
    ref = naive_dft(alpha, irreps, counter)
    rows.append({"group": spec, "label": G.label, "order": G.order, "strategy": "naive", "cmul": counter.mul,
                 "cadd": counter.add, "ms": f"{1e3 * (time.perf_counter() - t0):.3f}", "residual": "0",
                 "error": ""})
    for st in strategies:
        if st == "naive":
            continue
        row = {"group": spec, "label": G.label, "order": G.order, "strategy": st,
               "cmul": "", "cadd": "", "ms": "", "residual": "", "error": ""}
        try:
            plan = make_plan(G, _config(args, st), irreps=irreps)
            counter = OpCounter()
            t0 = time.perf_counter()
            F = execute_plan(plan, alpha, counter)
            row.update(cmul=counter.mul, cadd=counter.add, ms=f"{1e3 * (time.perf_counter() - t0):.3f}")
            if not args.no_verify:
                row["residual"] = f"{_relative_residual(F, ref, alpha):.3e}"
            if st == "auto":
                row["strategy"] = f"auto:{plan.kind}"
        except Exception as exc:  # recorded per row, the run continues
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def cmd_bench(args) -> int:
    if args.group:
        specs = list(args.group)
    else:
        if args.catalog not in CATALOGS:
            raise SpecError(f"unknown catalog {args.catalog!r}; choose from {sorted(CATALOGS)}")
        specs = CATALOGS[args.catalog]
    strategies = args.strategies.split(",") if args.strategies else ["auto"]
    for st in strategies:
        if st not in STRATEGIES:
            raise SpecError(f"unknown strategy {st!r}")
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for spec in specs:
            for row in _bench_rows(spec, strategies, args):
                w.writerow(row)
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base-order", type=int, default=24, help="groups this small use the naive DFT")
    common.add_argument("--epsilon", type=float, default=0.3,
                        help="a subgroup of order >= |G|^(1-epsilon/2) triggers a single-subgroup step")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gdft", description="Fourier transforms over finite groups.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dft", parents=[common], help="transform one coefficient vector")
    d.add_argument("--group", required=True, help="spec file, JSON object, or family:n")
    d.add_argument("--alpha", required=True, help="CSV/JSON file, random:SEED or delta:INDEX")
    d.add_argument("--strategy", default="auto", choices=STRATEGIES)
    d.add_argument("--out", help="output JSON path (stdout if omitted)")
    d.add_argument("--trace", help="write a JSON event log here")
    d.add_argument("--plan", help="run this plan dump instead of planning")
    d.add_argument("--dump-plan", help="write the plan tree as JSON here")
    d.set_defaults(func=cmd_dft)

    v = sub.add_parser("verify", parents=[common], help="compare strategies with the naive DFT")
    v.add_argument("--group", required=True)
    v.add_argument("--strategies", help="comma list; default all, skipping ones that do not apply")
    v.add_argument("--seeds", type=int, default=5)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", parents=[common], help="operation counts and timings as CSV")
    b.add_argument("--catalog", default="smoke", help=f"one of {sorted(CATALOGS)}")
    b.add_argument("--group", action="append", help="group spec; repeatable, overrides --catalog")
    b.add_argument("--strategies", help="comma list of strategies besides the naive baseline (default auto)")
    b.add_argument("--out", help="CSV path (stdout if omitted)")
    b.add_argument("--no-verify", action="store_true", help="skip the residual column")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GroupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

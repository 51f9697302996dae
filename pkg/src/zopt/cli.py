"""Command-line entry point.

Subcommands:
  bench   run optimizer/baseline benchmarks, emit CSV traces + SVG plots
  sample  draw from a tilted objective with the SDE sampler, emit CSV
  theory  run a named theoretical-rate check, emit a text report

Exit codes: 0 success, 1 user error (bad flags/arguments), 2 runtime failure
(including a theory check that does not pass). The ZOPT_SEED environment
variable overrides --seed when set.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from . import harness, svg, theory
from .baselines import ALGORITHM_NAMES
from .objectives import FUNCTION_NAMES, registry
from .rngutil import derive_rng
from .sde_sampler import LogTarget, SamplerParams, sample_batch
from .theory import CHECK_IDS


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="zopt", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    bench = sub.add_parser("bench", help="benchmark optimizers")
    bench.add_argument("--fn", help="comma-separated objective names")
    bench.add_argument("--dim", help="comma-separated dimensions")
    bench.add_argument("--iters", type=int)
    bench.add_argument("--trials", type=int)
    bench.add_argument("--algos", help="comma-separated algorithm names")
    bench.add_argument("--seed", type=int)
    bench.add_argument("--out", default="out")
    bench.add_argument("--config", help="plan file (key=value lines)")

    sample = sub.add_parser("sample", help="sample a tilted objective")
    sample.add_argument("--target", required=True, choices=FUNCTION_NAMES)
    sample.add_argument("--dim", type=int, required=True)
    sample.add_argument("--theta", type=float, required=True)
    sample.add_argument("--np", type=int, default=1000, dest="particles")
    sample.add_argument("--steps", type=int, default=10)
    sample.add_argument("--count", type=int, default=100)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", default="out")

    theory_p = sub.add_parser("theory", help="run a theory check")
    theory_p.add_argument("--check", required=True, choices=CHECK_IDS)
    theory_p.add_argument("--seed", type=int, default=0)
    theory_p.add_argument("--out", default="out")
    return parser


def _effective_seed(flag_value: Optional[int], default: int = 0) -> int:
    env = os.environ.get("ZOPT_SEED")
    if env:  # empty string counts as unset
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"ZOPT_SEED must be an integer, got {env!r}")
    return default if flag_value is None else flag_value


def _cmd_bench(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            plan = harness.parse_plan(fh.read())
        # explicit flags override the config file
        if args.fn:
            plan.functions = [s for s in args.fn.split(",") if s]
        if args.dim:
            plan.dimensions = [int(s) for s in args.dim.split(",") if s]
        if args.algos:
            plan.algorithms = [s for s in args.algos.split(",") if s]
        if args.iters is not None:
            plan.iterations = args.iters
        if args.trials is not None:
            plan.trials = args.trials
        if args.seed is not None:
            plan.master_seed = args.seed
        plan.out_dir = args.out
        plan.__post_init__()
    else:
        if not args.fn or not args.dim:
            raise UsageError("bench requires --fn and --dim (or --config)")
        plan = harness.ExperimentPlan(
            functions=[s for s in args.fn.split(",") if s],
            dimensions=[int(s) for s in args.dim.split(",") if s],
            algorithms=[s for s in (args.algos or "so").split(",") if s],
            iterations=args.iters if args.iters is not None else 500,
            trials=args.trials if args.trials is not None else 10,
            master_seed=args.seed if args.seed is not None else 0,
            out_dir=args.out,
        )
    plan.master_seed = _effective_seed(plan.master_seed, plan.master_seed)

    os.makedirs(plan.out_dir, exist_ok=True)
    records = harness.run_plan(plan)
    rows = harness.summarize(records)
    harness.write_trace_csv(records, os.path.join(plan.out_dir, "trace.csv"))
    harness.write_summary_csv(rows, os.path.join(plan.out_dir, "summary.csv"))
    for fn in plan.functions:
        for dim in plan.dimensions:
            series = {}
            for r in records:
                if (r.function, r.dimension, r.trial) == (fn, dim, 0) and r.trace:
                    series[r.algo] = [e.best_value for e in r.trace]
            if series:
                svg.convergence_plot(
                    series,
                    os.path.join(plan.out_dir, f"convergence_{fn}_d{dim}.svg"),
                    title=f"{fn} d={dim}")
            group = [r for r in rows if (r.function, r.dimension) == (fn, dim)]
            if group:
                svg.comparison_bars(
                    group,
                    os.path.join(plan.out_dir, f"comparison_{fn}_d{dim}.svg"),
                    title=f"{fn} d={dim}")
    failures = [r for r in records if r.error is not None]
    for r in failures:
        print(f"run failed: {r.algo}/{r.function}/d{r.dimension}/t{r.trial}: "
              f"{r.error}", file=sys.stderr)
    print(f"wrote {len(records)} runs to {plan.out_dir}")
    return 2 if failures else 0


def _cmd_sample(args) -> int:
    seed = _effective_seed(args.seed, args.seed)
    spec = registry(args.target, args.dim)
    theta = args.theta
    if theta <= 0:
        raise UsageError("--theta must be positive")

    def log_density(x):
        return -theta * np.asarray(spec.fn(x), dtype=float)

    target = LogTarget(
        log_density=log_density, support_box=spec.box,
        support_bound=float(np.linalg.norm(
            np.maximum(np.abs(spec.box.lower), np.abs(spec.box.upper)))))
    gamma = float(np.max(spec.box.half_widths)) ** 2
    params = SamplerParams(gamma=gamma, particle_count=args.particles,
                           step_count=args.steps)
    rng = derive_rng(seed, "sample", args.target, str(args.dim))
    draws = sample_batch(target, params, args.count, rng)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "samples.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"x{j}" for j in range(args.dim)) + "\n")
        for row in draws:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {len(draws)} draws to {path}")
    return 0


def _cmd_theory(args) -> int:
    seed = _effective_seed(args.seed, args.seed)
    rng = derive_rng(seed, "theory", args.check)
    reports = theory.run_check(args.check, rng)
    os.makedirs(args.out, exist_ok=True)
    lines: List[str] = []
    for rep in reports:
        lines.extend(rep.lines())
    text = "\n".join(lines) + "\n"
    with open(os.path.join(args.out, "theory_report.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(text, end="")
    return 0 if all(r.passed for r in reports) else 2


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "sample":
            return _cmd_sample(args)
        return _cmd_theory(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (harness.PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Experiment plans, deterministic run scheduling, and CSV emission.

A plan is the Cartesian product of functions x dimensions x algorithms x
trials. Every trial gets its own counter-based RNG stream derived from
(master seed, function, algorithm, trial), so removing one trial never
changes another and reruns are byte-identical apart from wall time.
"""

from __future__ import annotations

import csv
import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import baselines, zoom
from .baselines import ALGORITHM_NAMES
from .objectives import FUNCTION_NAMES, EvalCounter, counted, registry
from .rngutil import derive_rng


class PlanError(ValueError):
    """Malformed or unresolvable experiment configuration."""


@dataclass
class ExperimentPlan:
    functions: List[str]
    dimensions: List[int]
    algorithms: List[str]
    iterations: int = 500
    trials: int = 10
    master_seed: int = 0
    out_dir: str = "out"

    def __post_init__(self):
        if not self.functions:
            raise PlanError("plan needs at least one function")
        if not self.dimensions:
            raise PlanError("plan needs at least one dimension")
        if not self.algorithms:
            raise PlanError("plan needs at least one algorithm")
        if self.iterations < 1 or self.trials < 1:
            raise PlanError("iterations and trials must be >= 1")
        for fn in self.functions:
            if fn not in FUNCTION_NAMES:
                raise PlanError(f"unknown function {fn!r}")
        for algo in self.algorithms:
            if algo not in ALGORITHM_NAMES:
                raise PlanError(f"unknown algorithm {algo!r}")
        for fn in self.functions:
            for d in self.dimensions:
                try:
                    registry(fn, d)
                except ValueError as exc:
                    raise PlanError(str(exc)) from exc


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    best_value: float
    fevals: int
    elapsed_ms: float


@dataclass
class RunRecord:
    algo: str
    function: str
    dimension: int
    trial: int
    trace: List[TraceEntry] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def final_best(self) -> float:
        return self.trace[-1].best_value if self.trace else float("nan")

    @property
    def final_elapsed_ms(self) -> float:
        return self.trace[-1].elapsed_ms if self.trace else float("nan")


@dataclass(frozen=True)
class SummaryRow:
    algo: str
    function: str
    dimension: int
    mean_best: float
    std_best: float
    mean_elapsed_ms: float


_PLAN_KEYS = ("fn", "dim", "algos", "iters", "trials", "seed", "out")


def parse_plan(text: str) -> ExperimentPlan:
    """Line-oriented key=value config; '#' starts a comment, last key wins."""
    values: Dict[str, Tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PlanError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _PLAN_KEYS:
            raise PlanError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            warnings.warn(
                f"line {lineno}: duplicate key {key!r} overrides line "
                f"{values[key][0]}", stacklevel=2)
        values[key] = (lineno, val)

    def get(key: str, default=None) -> Optional[str]:
        return values[key][1] if key in values else default

    def as_int(key: str, default: int) -> int:
        raw = get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise PlanError(f"line {values[key][0]}: {key} must be an "
                            f"integer, got {raw!r}") from None

    if "fn" not in values:
        raise PlanError("config defines no function (missing 'fn=')")
    if "dim" not in values:
        raise PlanError("config defines no dimension (missing 'dim=')")
    functions = [s.strip() for s in values["fn"][1].split(",") if s.strip()]
    try:
        dimensions = [int(s) for s in values["dim"][1].split(",") if s.strip()]
    except ValueError:
        raise PlanError(f"line {values['dim'][0]}: dim must be a "
                        "comma-separated list of integers") from None
    algos_raw = get("algos", "so")
    algorithms = [s.strip() for s in algos_raw.split(",") if s.strip()]
    return ExperimentPlan(
        functions=functions,
        dimensions=dimensions,
        algorithms=algorithms,
        iterations=as_int("iters", 500),
        trials=as_int("trials", 10),
        master_seed=as_int("seed", 0),
        out_dir=get("out", "out"),
    )


_BASELINE_RUNNERS = {
    "pso": baselines.pso_run,
    "de": baselines.de_run,
    "bfgs": baselines.bfgs_run,
    "sa": baselines.sa_run,
    "shc": baselines.shc_run,
    "adam": baselines.adam_run,
}


def run_single(algo: str, function: str, dimension: int, trial: int,
               iterations: int, rng: np.random.Generator) -> RunRecord:
    """One (algorithm, function, dimension, trial) cell of the product."""
    spec = registry(function, dimension)
    record = RunRecord(algo=algo, function=function, dimension=dimension,
                       trial=trial)
    counter = EvalCounter()
    started = time.perf_counter()
    try:
        if algo == "so":
            params = zoom.ZoomParams(max_iters=iterations)
            _, _, trace = zoom.optimize(spec.fn, spec.box, params, rng,
                                        counter=counter)
            record.trace = [TraceEntry(r.iteration, r.best_value, r.fevals,
                                       r.elapsed_ms) for r in trace]
        else:
            U = counted(spec.fn, counter)
            entries: List[TraceEntry] = []

            def rec(best, _entries=entries, _counter=counter, _t0=started):
                _entries.append(TraceEntry(len(_entries), float(best),
                                           _counter.count,
                                           (time.perf_counter() - _t0) * 1e3))

            _BASELINE_RUNNERS[algo](U, spec, iterations, rng, record=rec)
            record.trace = entries
    except Exception as exc:  # recorded, remaining runs proceed
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def run_plan(plan: ExperimentPlan) -> List[RunRecord]:
    """All runs in deterministic order (function, dimension, algo, trial)."""
    records: List[RunRecord] = []
    for function in plan.functions:
        for dimension in plan.dimensions:
            for algo in plan.algorithms:
                for trial in range(plan.trials):
                    rng = derive_rng(plan.master_seed, function, algo,
                                     str(trial))
                    records.append(run_single(algo, function, dimension,
                                              trial, plan.iterations, rng))
    return records


def summarize(records: Sequence[RunRecord]) -> List[SummaryRow]:
    """Mean/population-std of final best and mean elapsed per (algo, fn, dim).

    Failed runs (record.error set) are excluded with a warning.
    """
    groups: Dict[Tuple[str, str, int], List[RunRecord]] = {}
    order: List[Tuple[str, str, int]] = []
    for r in records:
        if r.error is not None:
            warnings.warn(f"excluding failed run {r.algo}/{r.function}/"
                          f"d{r.dimension}/t{r.trial}: {r.error}", stacklevel=2)
            continue
        key = (r.algo, r.function, r.dimension)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    rows = []
    for key in order:
        finals = np.array([r.final_best for r in groups[key]])
        elapsed = np.array([r.final_elapsed_ms for r in groups[key]])
        rows.append(SummaryRow(
            algo=key[0], function=key[1], dimension=key[2],
            mean_best=float(np.mean(finals)),
            std_best=float(np.std(finals)),  # population convention
            mean_elapsed_ms=float(np.mean(elapsed)),
        ))
    return rows


def _f(v: float) -> str:
    """Shortest round-trip float formatting."""
    return repr(float(v))


def write_trace_csv(records: Sequence[RunRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algo", "function", "dim", "trial", "iter", "best_value",
                    "fevals", "elapsed_ms"])
        for r in records:
            for e in r.trace:
                w.writerow([r.algo, r.function, r.dimension, r.trial,
                            e.iteration, _f(e.best_value), e.fevals,
                            _f(e.elapsed_ms)])


def write_summary_csv(rows: Sequence[SummaryRow], path: str) -> None:
    # std_best is the population standard deviation over the trial finals
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algo", "function", "dim", "mean_best", "std_best",
                    "mean_elapsed_ms"])
        for r in rows:
            w.writerow([r.algo, r.function, r.dimension, _f(r.mean_best),
                        _f(r.std_best), _f(r.mean_elapsed_ms)])

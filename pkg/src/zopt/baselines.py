"""Baseline optimizers for the comparative study: PSO, DE, BFGS, SA, SHC, Adam.

Shared interface: each ``*_run`` takes a (possibly counted) objective, an
ObjectiveSpec, an outer-iteration budget, and an RNG, and returns
``(best_x, best_value, trace)`` where ``trace`` is the best-so-far value per
outer iteration. An optional ``record(best)`` callback fires once per
iteration so the harness can attach evaluation counts and wall time.

Hyperparameter defaults are standard literature values; all iterates are
kept inside the search box by clamping/projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .objectives import ObjectiveSpec

ALGORITHM_NAMES = ("so", "pso", "de", "bfgs", "sa", "shc", "adam")


@dataclass
class GradientOracle:
    mode: str = "central"  # "central" or "analytic"
    h: float = 1e-6        # relative step
    analytic: Optional[Callable] = None


@dataclass
class PSOParams:
    swarm: int = 30
    inertia: float = 0.7
    c1: float = 1.5
    c2: float = 1.5


@dataclass
class DEParams:
    pop: int = 30
    f: float = 0.5
    cr: float = 0.9


@dataclass
class SAParams:
    t0: Optional[float] = None  # default: objective range over 100 probes
    cooling: float = 0.95
    step_frac: float = 0.1      # proposal sigma as a fraction of half-width
    probes: int = 100


@dataclass
class SHCParams:
    step_frac: float = 0.1
    decay: float = 0.99


@dataclass
class AdamParams:
    lr_frac: float = 0.01  # learning rate as a fraction of half-width
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class BFGSParams:
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    grad_tol: float = 1e-12


def fd_gradient(U: Callable, x: np.ndarray, oracle: GradientOracle) -> np.ndarray:
    """Central-difference gradient, step relative to coordinate magnitude."""
    if oracle.mode == "analytic":
        if oracle.analytic is None:
            raise ValueError("analytic mode needs oracle.analytic")
        return np.asarray(oracle.analytic(x), dtype=float)
    x = np.asarray(x, dtype=float)
    d = x.size
    h = oracle.h * np.maximum(1.0, np.abs(x))
    pts = np.concatenate([x + np.diag(h), x - np.diag(h)])
    vals = np.asarray(U(pts), dtype=float)
    return (vals[:d] - vals[d:]) / (2.0 * h)


def _record(cb, best):
    if cb is not None:
        cb(best)


def pso_run(U, spec: ObjectiveSpec, iters: int, rng: np.random.Generator,
            params: Optional[PSOParams] = None, record=None):
    """Global-best particle swarm with box clamping."""
    p = params or PSOParams()
    box = spec.box
    pos = box.uniform(rng, p.swarm)
    vel = np.zeros_like(pos)
    vals = np.asarray(U(pos), dtype=float)
    pbest, pbest_val = pos.copy(), vals.copy()
    g = int(np.argmin(vals))
    gbest, gbest_val = pos[g].copy(), float(vals[g])
    trace: List[float] = []
    for _ in range(iters):
        r1 = rng.random(pos.shape)
        r2 = rng.random(pos.shape)
        vel = (p.inertia * vel + p.c1 * r1 * (pbest - pos)
               + p.c2 * r2 * (gbest - pos))
        pos = box.clip(pos + vel)
        vals = np.asarray(U(pos), dtype=float)
        better = vals < pbest_val
        pbest[better] = pos[better]
        pbest_val[better] = vals[better]
        g = int(np.argmin(pbest_val))
        if pbest_val[g] < gbest_val:
            gbest, gbest_val = pbest[g].copy(), float(pbest_val[g])
        trace.append(gbest_val)
        _record(record, gbest_val)
    return gbest, gbest_val, trace


def de_run(U, spec: ObjectiveSpec, iters: int, rng: np.random.Generator,
           params: Optional[DEParams] = None, record=None):
    """DE/rand/1/bin with greedy selection and box clamping."""
    p = params or DEParams()
    box = spec.box
    d = spec.dimension
    pop = box.uniform(rng, p.pop)
    vals = np.asarray(U(pop), dtype=float)
    trace: List[float] = []
    idx = np.arange(p.pop)
    for _ in range(iters):
        # three distinct donors per target, none equal to the target itself
        donors = np.empty((p.pop, 3), dtype=np.int64)
        for i in range(p.pop):
            donors[i] = rng.choice(p.pop - 1, size=3, replace=False)
        donors[donors >= idx[:, None]] += 1
        a, b, c = donors[:, 0], donors[:, 1], donors[:, 2]
        mutant = pop[a] + p.f * (pop[b] - pop[c])
        cross = rng.random((p.pop, d)) < p.cr
        cross[idx, rng.integers(d, size=p.pop)] = True
        trial = box.clip(np.where(cross, mutant, pop))
        tvals = np.asarray(U(trial), dtype=float)
        better = tvals <= vals
        pop[better] = trial[better]
        vals[better] = tvals[better]
        best = float(np.min(vals))
        trace.append(best)
        _record(record, best)
    g = int(np.argmin(vals))
    return pop[g].copy(), float(vals[g]), trace


def sa_run(U, spec: ObjectiveSpec, iters: int, rng: np.random.Generator,
           params: Optional[SAParams] = None, record=None):
    """Gaussian-proposal simulated annealing with geometric cooling."""
    p = params or SAParams()
    box = spec.box
    x = box.uniform(rng)
    fx = float(U(x))
    temp = p.t0
    if temp is None:
        probes = np.asarray(U(box.uniform(rng, p.probes)), dtype=float)
        temp = max(float(np.max(probes) - np.min(probes)), 1e-12)
    sigma = p.step_frac * box.half_widths
    best_x, best = x.copy(), fx
    trace: List[float] = []
    for _ in range(iters):
        prop = box.clip(x + sigma * rng.standard_normal(x.size))
        fp = float(U(prop))
        delta = fp - fx
        if delta <= 0 or rng.random() < np.exp(-delta / temp):
            x, fx = prop, fp
            if fx < best:
                best_x, best = x.copy(), fx
        temp *= p.cooling
        trace.append(best)
        _record(record, best)
    return best_x, best, trace


def shc_run(U, spec: ObjectiveSpec, iters: int, rng: np.random.Generator,
            params: Optional[SHCParams] = None, record=None):
    """Accept-if-better random-neighbor search with decaying radius."""
    p = params or SHCParams()
    box = spec.box
    x = box.uniform(rng)
    fx = float(U(x))
    sigma = p.step_frac * box.half_widths
    trace: List[float] = []
    for _ in range(iters):
        prop = box.clip(x + sigma * rng.standard_normal(x.size))
        fp = float(U(prop))
        if fp < fx:
            x, fx = prop, fp
        sigma = sigma * p.decay
        trace.append(fx)
        _record(record, fx)
    return x, fx, trace


def adam_run(U, spec: ObjectiveSpec, iters: int, rng: np.random.Generator,
             params: Optional[AdamParams] = None, record=None,
             oracle: Optional[GradientOracle] = None):
    """Adam with bias correction on finite-difference gradients."""
    p = params or AdamParams()
    oracle = oracle or GradientOracle()
    box = spec.box
    lr = p.lr_frac * float(np.max(box.half_widths))
    x = box.uniform(rng)
    fx = float(U(x))
    best_x, best = x.copy(), fx
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    trace: List[float] = []
    for k in range(1, iters + 1):
        g = fd_gradient(U, x, oracle)
        m = p.beta1 * m + (1 - p.beta1) * g
        v = p.beta2 * v + (1 - p.beta2) * g * g
        mh = m / (1 - p.beta1**k)
        vh = v / (1 - p.beta2**k)
        x = box.clip(x - lr * mh / (np.sqrt(vh) + p.eps))
        fx = float(U(x))
        if fx < best:
            best_x, best = x.copy(), fx
        trace.append(best)
        _record(record, best)
    return best_x, best, trace


def bfgs_run(U, spec: ObjectiveSpec, iters: int, rng: np.random.Generator,
             params: Optional[BFGSParams] = None, record=None,
             oracle: Optional[GradientOracle] = None):
    """Full-matrix BFGS with Armijo backtracking from a random start.

    Line-search failure terminates the descent; the trace is padded with the
    incumbent so every run reports the same number of iterations.
    """
    p = params or BFGSParams()
    oracle = oracle or GradientOracle()
    box = spec.box
    x = box.uniform(rng)
    fx = float(U(x))
    g = fd_gradient(U, x, oracle)
    h_inv = np.eye(spec.dimension)
    best_x, best = x.copy(), fx
    trace: List[float] = []
    stopped = False
    for _ in range(iters):
        if not stopped:
            if np.linalg.norm(g) <= p.grad_tol:
                stopped = True
            else:
                direction = -h_inv @ g
                slope = float(g @ direction)
                if slope >= 0:  # lost positive definiteness; reset
                    h_inv = np.eye(spec.dimension)
                    direction = -g
                    slope = -float(g @ g)
                step = 1.0
                accepted = False
                for _bt in range(p.max_backtracks):
                    cand = box.clip(x + step * direction)
                    fc = float(U(cand))
                    if fc <= fx + p.armijo_c * step * slope:
                        accepted = True
                        break
                    step *= p.backtrack
                if not accepted:
                    stopped = True
                else:
                    g_new = fd_gradient(U, cand, oracle)
                    s = cand - x
                    y = g_new - g
                    sy = float(s @ y)
                    if sy > 1e-12:
                        rho = 1.0 / sy
                        eye = np.eye(spec.dimension)
                        h_inv = ((eye - rho * np.outer(s, y)) @ h_inv
                                 @ (eye - rho * np.outer(y, s))
                                 + rho * np.outer(s, s))
                    x, fx, g = cand, fc, g_new
                    if fx < best:
                        best_x, best = x.copy(), fx
        trace.append(best)
        _record(record, best)
    return best_x, best, trace

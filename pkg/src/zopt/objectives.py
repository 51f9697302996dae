"""Benchmark objective functions with search boxes and known-optimum metadata.

All evaluators are pure and vectorized: ``x`` may be a single point of shape
``(d,)`` or a batch of shape ``(n, d)``; the result is a scalar or an ``(n,)``
array. Out-of-box inputs are still evaluated; box enforcement is the caller's
job.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

FUNCTION_NAMES = (
    "sphere",
    "schwefel",
    "rosenbrock",
    "ackley",
    "griewank",
    "rastrigin",
    "levy",
    "weierstrass",
    "step",
    "artificial",
)

# Weierstrass configuration: a = 0.5, b = 13 (odd, ab > 1 + 3pi/2).
# The series is truncated at k_max = 20; 0.5**21 is below every tolerance
# used elsewhere in the suite.
WEIERSTRASS_A = 0.5
WEIERSTRASS_B = 13
WEIERSTRASS_KMAX = 20

SCHWEFEL_OFFSET = 418.9829
SCHWEFEL_MINIMIZER = 420.9687


class UnknownObjectiveError(ValueError):
    """Raised when a function identifier is not in the registry."""


class InvalidDimensionError(ValueError):
    """Raised when a dimension is not valid for the requested function."""


@dataclass(frozen=True)
class SearchBox:
    """Axis-aligned box [lower_i, upper_i]^d."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower/upper must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if not np.all(lo < hi):
            raise ValueError("lower bounds must be strictly below upper bounds")

    @classmethod
    def symmetric(cls, half_width: float, dim: int) -> "SearchBox":
        h = float(half_width)
        return cls(np.full(dim, -h), np.full(dim, h))

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def half_widths(self) -> np.ndarray:
        return (self.upper - self.lower) / 2.0

    @property
    def center(self) -> np.ndarray:
        return (self.upper + self.lower) / 2.0

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)

    def clip(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def uniform(self, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
        shape = (self.dimension,) if n is None else (n, self.dimension)
        return rng.uniform(self.lower, self.upper, size=shape)


@dataclass(frozen=True)
class ObjectiveSpec:
    """A named test function with dimension, box and optimum metadata."""

    name: str
    dimension: int
    box: SearchBox
    known_min_value: float
    known_minimizer: Optional[np.ndarray]
    min_exact: bool
    min_tolerance: float
    tags: frozenset
    fn: Callable = None


@dataclass
class EvalCounter:
    """Counts objective evaluations; one increment per evaluated point."""

    count: int = 0

    def add(self, n: int = 1) -> None:
        if n < 0:
            raise ValueError("counter never decreases")
        self.count += n


def counted(fn: Callable, counter: EvalCounter) -> Callable:
    """Wrap an evaluator so every evaluated point bumps ``counter``."""

    def wrapped(x):
        x = np.asarray(x, dtype=float)
        n = 1 if x.ndim == 1 else int(np.prod(x.shape[:-1]))
        counter.add(n)
        return fn(x)

    return wrapped


def eval_sphere(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def eval_schwefel(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return SCHWEFEL_OFFSET * d - np.sum(x * np.sin(np.sqrt(np.abs(x))), axis=-1)


def eval_rosenbrock(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise InvalidDimensionError("rosenbrock requires dimension >= 2")
    a = x[..., :-1]
    b = x[..., 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2, axis=-1)


def eval_ackley(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    rms = np.sqrt(np.sum(x * x, axis=-1) / d)
    mean_cos = np.sum(np.cos(2.0 * np.pi * x), axis=-1) / d
    return -20.0 * np.exp(-0.2 * rms) - np.exp(mean_cos) + 20.0 + np.e


def eval_griewank(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    idx = np.sqrt(np.arange(1, x.shape[-1] + 1, dtype=float))
    return 1.0 + np.sum(x * x, axis=-1) / 4000.0 - np.prod(np.cos(x / idx), axis=-1)


def eval_rastrigin(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return 10.0 * d + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x), axis=-1)


def eval_levy(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[..., 0]) ** 2
    wm = w[..., :-1]
    mid = np.sum((wm - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * wm + 1.0) ** 2), axis=-1)
    wl = w[..., -1]
    tail = (wl - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * wl) ** 2)
    return head + mid + tail


def eval_weierstrass(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    # cos(b^k pi x) with b^k beyond the 53-bit mantissa: split x = n + r with
    # n = round(x). b^k is odd, so cos(b^k pi x) = (-1)^n cos(b^k pi r); this
    # keeps the evaluation exact at integer x (in particular at the minimizer
    # x = 1) where the naive product b^k * x would round.
    n = np.round(x)
    r = x - n
    sign = np.where(np.mod(n, 2.0) == 0.0, 1.0, -1.0)
    total = np.zeros(x.shape[:-1], dtype=float)
    bk = 1.0
    for k in range(WEIERSTRASS_KMAX + 1):
        ak = WEIERSTRASS_A**k
        total = total + ak * np.sum(sign * np.cos(np.pi * bk * r), axis=-1)
        bk *= WEIERSTRASS_B
    return total + d / (1.0 - WEIERSTRASS_A)


def eval_step(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sum(np.floor(x + 0.5) ** 2, axis=-1)


def eval_artificial(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 1e5 * np.sum(np.sqrt(np.abs(np.sin(np.abs(x - 0.1) ** 4))), axis=-1)


_WEIERSTRASS_MIN = WEIERSTRASS_A ** (WEIERSTRASS_KMAX + 1) / (1.0 - WEIERSTRASS_A)

# name -> (evaluator, box half-width, minimizer coordinate, per-dim min value,
#          exact flag, tolerance, tags, minimum valid dimension)
_TABLE = {
    "sphere": (eval_sphere, 5.12, 0.0, 0.0, True, 1e-9,
               ("differentiable", "separable", "scalable", "unimodal"), 1),
    "schwefel": (eval_schwefel, 500.0, SCHWEFEL_MINIMIZER, 0.0, False, 1e-3,
                 ("differentiable", "separable", "scalable", "multimodal"), 1),
    "rosenbrock": (eval_rosenbrock, 5.0, 1.0, 0.0, True, 1e-9,
                   ("differentiable", "scalable", "unimodal"), 2),
    "ackley": (eval_ackley, 32.768, 0.0, 0.0, True, 1e-9,
               ("differentiable", "scalable", "multimodal"), 1),
    "griewank": (eval_griewank, 600.0, 0.0, 0.0, True, 1e-9,
                 ("differentiable", "scalable", "multimodal"), 1),
    "rastrigin": (eval_rastrigin, 5.12, 0.0, 0.0, True, 1e-9,
                  ("differentiable", "separable", "scalable", "multimodal"), 1),
    "levy": (eval_levy, 10.0, 1.0, 0.0, True, 1e-9,
             ("differentiable", "separable", "scalable", "multimodal"), 1),
    "weierstrass": (eval_weierstrass, 2.0, 1.0, _WEIERSTRASS_MIN, True, 1e-9,
                    ("separable", "scalable", "multimodal"), 1),
    "step": (eval_step, 100.0, 0.0, 0.0, True, 1e-9,
             ("discontinuous", "separable", "scalable", "multimodal"), 1),
    "artificial": (eval_artificial, 10.0, 0.1, 0.0, True, 1e-9,
                   ("separable", "multimodal"), 1),
}


def get_function(name: str) -> Callable:
    """Evaluator for ``name``; raises UnknownObjectiveError otherwise."""
    try:
        return _TABLE[name][0]
    except KeyError:
        raise UnknownObjectiveError(f"unknown objective {name!r}") from None


def registry(name: str, dimension: int) -> ObjectiveSpec:
    """Fully populated spec (box, minimum metadata, tags) for ``name``."""
    if name not in _TABLE:
        raise UnknownObjectiveError(f"unknown objective {name!r}")
    _, half, xmin, per_dim_min, exact, tol, tags, min_dim = _TABLE[name]
    dimension = int(dimension)
    if dimension < min_dim:
        raise InvalidDimensionError(
            f"{name} requires dimension >= {min_dim}, got {dimension}"
        )
    return ObjectiveSpec(
        name=name,
        dimension=dimension,
        box=SearchBox.symmetric(half, dimension),
        known_min_value=per_dim_min * dimension,
        known_minimizer=np.full(dimension, xmin),
        min_exact=exact,
        min_tolerance=tol,
        tags=frozenset(tags),
        fn=_TABLE[name][0],
    )

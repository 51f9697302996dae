"""Small statistical helpers shared by the sampler checks and the harness."""

from __future__ import annotations

import numpy as np


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (max empirical CDF gap)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic needs nonempty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_coordinatewise(x, y) -> np.ndarray:
    """Per-coordinate two-sample KS statistics for (n, d) sample arrays."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    return np.array([ks_two_sample(x[:, j], y[:, j]) for j in range(x.shape[1])])


def fit_line(log_x, log_y):
    """Least-squares line fit; returns (slope, intercept, max |residual|)."""
    log_x = np.asarray(log_x, dtype=float)
    log_y = np.asarray(log_y, dtype=float)
    slope, intercept = np.polyfit(log_x, log_y, 1)
    resid = log_y - (slope * log_x + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))

"""Monte-Carlo-drift SDE sampler for unnormalized log-densities.

The sampler integrates

    dX_t = b_t(X_t) dt + sqrt(eps * beta'_t) dW_t,   X_0 ~ N(0, gamma I),

on the time grid t_k = k / M, where the drift is a softmax-weighted particle
average. All weights are handled in log space with a max shift: the optimizer
composes targets with tilt factors around 1e100, so direct exponentials are
meaningless in floating point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .objectives import SearchBox


class DegenerateWeightsError(RuntimeError):
    """All particle log-weights are -inf.

    Remedies: widen gamma, enlarge the particle count, or shrink the tilt.
    """

    def __init__(self, message: str, chain_index: Optional[int] = None):
        super().__init__(message)
        self.chain_index = chain_index


class ChainDivergedError(RuntimeError):
    """A chain state became non-finite; never silently repaired."""


@dataclass(frozen=True)
class Schedule:
    """Interpolation pair (sigma, beta) with sigma + beta = 1, sigma' < 0."""

    sigma: Callable[[float], float]
    beta: Callable[[float], float]
    dsigma: Callable[[float], float]
    dbeta: Callable[[float], float]

    @classmethod
    def linear(cls) -> "Schedule":
        return cls(
            sigma=lambda t: 1.0 - t,
            beta=lambda t: t,
            dsigma=lambda t: -1.0,
            dbeta=lambda t: 1.0,
        )


@dataclass
class SamplerParams:
    gamma: float
    epsilon: Optional[float] = None
    particle_count: int = 1000
    step_count: int = 10
    lam: float = 9.0
    redraw_particles: bool = False
    schedule: Schedule = field(default_factory=Schedule.linear)

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.epsilon is None:
            self.epsilon = self.gamma
        if not 0 < self.epsilon <= self.gamma:
            raise ValueError("epsilon must lie in (0, gamma]")
        if self.particle_count < 1 or self.step_count < 1:
            raise ValueError("particle_count and step_count must be >= 1")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.lam < 9.0:
            warnings.warn("lambda < 9 is outside the fidelity guarantee regime",
                          stacklevel=2)


@dataclass(frozen=True)
class LogTarget:
    """Unnormalized log-density with a bounded support box."""

    log_density: Callable[[np.ndarray], np.ndarray]
    support_box: SearchBox
    support_bound: float

    @property
    def dimension(self) -> int:
        return self.support_box.dimension


@dataclass
class ChainState:
    position: np.ndarray
    step_index: int = 0


@dataclass(frozen=True)
class DriftDiagnostics:
    max_log_weight: float
    effective_sample_size: float


class ScheduleValues(NamedTuple):
    sigma: float
    beta: float
    dsigma: float
    dbeta: float
    ell: float
    tau: float


def schedule_eval(t: float, params: SamplerParams) -> ScheduleValues:
    """(sigma, beta, sigma', beta', ell, tau) at time t in [0, 1)."""
    if t >= 1.0:
        raise ValueError("schedule singular at t >= 1 (sigma = 0)")
    sch = params.schedule
    sigma = sch.sigma(t)
    beta = sch.beta(t)
    ell = params.epsilon * beta + params.gamma * sigma
    tau = np.sqrt(params.lam * ell / sigma)
    return ScheduleValues(sigma, beta, sch.dsigma(t), sch.dbeta(t), ell, tau)


def log_weights(x, xi, t: float, target: LogTarget, params: SamplerParams) -> np.ndarray:
    """Log importance weights for particles ``xi`` at state ``x``, time t.

    log H = -sigma |x + tau beta xi|^2 / (2 ell) + |xi|^2 / 2
            + log f(x - tau sigma xi).
    """
    sv = schedule_eval(t, params)
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    shifted = x + sv.tau * sv.beta * xi
    quad = -sv.sigma * np.sum(shifted * shifted, axis=-1) / (2.0 * sv.ell)
    probe = x - sv.tau * sv.sigma * xi
    return quad + 0.5 * np.sum(xi * xi, axis=-1) + target.log_density(probe)


def log_weight(x, xi, t: float, target: LogTarget, params: SamplerParams) -> float:
    """Scalar log weight for a single particle."""
    return float(np.asarray(log_weights(x, xi, t, target, params)).ravel()[0])


def _softmax(lw: np.ndarray) -> tuple[np.ndarray, float]:
    m = np.max(lw)
    if not np.isfinite(m):
        raise DegenerateWeightsError(
            "all particle weights vanished; widen gamma, enlarge the particle "
            "count, or shrink the tilt"
        )
    w = np.exp(lw - m)
    return w / np.sum(w), float(m)


def drift_diagnostics(lw: np.ndarray) -> DriftDiagnostics:
    w, m = _softmax(np.asarray(lw, dtype=float))
    ess = 1.0 / float(np.sum(w * w))
    return DriftDiagnostics(max_log_weight=m, effective_sample_size=ess)


def drift_mc(x, t: float, particles, target: LogTarget, params: SamplerParams,
             form: str = "xi") -> np.ndarray:
    """Monte-Carlo drift estimate at state ``x`` and time t.

    ``form`` selects between the two algebraically equivalent expressions:
    "xi" gives tau sigma' * weighted mean of the particles, "point" gives
    (sigma'/sigma) [x - weighted mean of the probe points x - tau sigma xi].
    """
    sv = schedule_eval(t, params)
    x = np.asarray(x, dtype=float)
    xi = np.asarray(particles, dtype=float)
    lw = log_weights(x, xi, t, target, params)
    w, _ = _softmax(lw)
    if form == "xi":
        return sv.tau * sv.dsigma * (w @ xi)
    if form == "point":
        probe = x - sv.tau * sv.sigma * xi
        return (sv.dsigma / sv.sigma) * (x - w @ probe)
    raise ValueError(f"unknown drift form {form!r}")


def exact_drift_gaussian(x, t: float, s: float, params: SamplerParams) -> np.ndarray:
    """Closed-form drift for the target N(0, s^2 I); oracle for drift_mc."""
    sv = schedule_eval(t, params)
    x = np.asarray(x, dtype=float)
    shrink = 1.0 - sv.beta * s * s / (sv.ell * sv.sigma + sv.beta**2 * s * s)
    return (sv.dsigma / sv.sigma) * x * shrink


def euler_step(chain: ChainState, t: float, dt: float, drift: np.ndarray,
               params: SamplerParams, noise: np.ndarray) -> ChainState:
    """One Euler-Maruyama step; non-finite results are a hard error."""
    sv = schedule_eval(t, params)
    position = chain.position + drift * dt + np.sqrt(params.epsilon * sv.dbeta * dt) * noise
    if not np.all(np.isfinite(position)):
        raise ChainDivergedError(
            f"non-finite chain state at t={t} (step {chain.step_index}): "
            f"|drift|={float(np.max(np.abs(drift)))}"
        )
    return ChainState(position=position, step_index=chain.step_index + 1)


def marginal_density_mc(x, t: float, particles, target: LogTarget,
                        params: SamplerParams) -> float:
    """Particle estimate of the time-t marginal density at ``x`` (>= 0)."""
    sv = schedule_eval(t, params)
    lw = log_weights(x, particles, t, target, params)
    m = np.max(lw)
    if not np.isfinite(m):
        return 0.0
    scale = (sv.tau * np.sqrt(sv.sigma / sv.ell)) ** target.dimension
    return float(scale * np.exp(m) * np.mean(np.exp(lw - m)))


def run_chain(target: LogTarget, params: SamplerParams,
              rng: np.random.Generator) -> np.ndarray:
    """Integrate one chain; returns the final state X_M.

    Draw order (fixed for reproducibility): initial state, particle set,
    then one noise vector per step. With ``redraw_particles`` the set is
    drawn fresh at the top of every step instead. Delegates to the batched
    integrator so single-chain and batched runs agree bitwise.
    """
    return _run_chain_block(target, params, [rng], first_index=0)[0]


def sample_batch(target: LogTarget, params: SamplerParams, count: int,
                 rng: np.random.Generator) -> np.ndarray:
    """``count`` independent chains with derived RNG streams, shape (count, d).

    Bitwise equal to stacking run_chain over rng.spawn(count); chains are
    advanced together in chunks so the drift arithmetic is batched.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    d = target.dimension
    if count == 0:
        return np.empty((0, d))
    children = rng.spawn(count)
    out = np.empty((count, d))
    chunk = max(1, int(4_000_000 // max(params.particle_count * d, 1)))
    for start in range(0, count, chunk):
        idx = range(start, min(start + chunk, count))
        out[list(idx)] = _run_chain_block(target, params, [children[i] for i in idx],
                                          first_index=start)
    return out


def _run_chain_block(target: LogTarget, params: SamplerParams, rngs,
                     first_index: int) -> np.ndarray:
    c = len(rngs)
    d = target.dimension
    n = params.particle_count
    m = params.step_count
    dt = 1.0 / m
    positions = np.empty((c, d))
    noises = np.empty((c, m, d))
    if params.redraw_particles:
        xis = np.empty((c, m, n, d))
        for i, r in enumerate(rngs):
            positions[i] = np.sqrt(params.gamma) * r.standard_normal(d)
            for k in range(m):
                xis[i, k] = r.standard_normal((n, d))
                noises[i, k] = r.standard_normal(d)
    else:
        xis = np.empty((c, 1, n, d))
        for i, r in enumerate(rngs):
            positions[i] = np.sqrt(params.gamma) * r.standard_normal(d)
            xis[i, 0] = r.standard_normal((n, d))
            for k in range(m):
                noises[i, k] = r.standard_normal(d)

    # particle norms and state-particle inner products drive the quadratic
    # part of the log weight; expanding |x + c xi|^2 keeps the big (c, n, d)
    # temporaries down to the single probe buffer needed for log f
    xi_sq = np.sum(xis * xis, axis=-1)  # (c, m or 1, n)
    probe = np.empty((c, n, d))
    for k in range(m):
        t = k * dt
        sv = schedule_eval(t, params)
        ki = k if params.redraw_particles else 0
        xi = xis[:, ki]
        sq = xi_sq[:, ki]
        x_dot_xi = np.einsum("cd,cnd->cn", positions, xi)
        x_sq = np.sum(positions * positions, axis=1)
        tb = sv.tau * sv.beta
        quad = (-sv.sigma / (2.0 * sv.ell)) * (x_sq[:, None]
                                               + 2.0 * tb * x_dot_xi
                                               + tb * tb * sq)
        np.multiply(xi, -sv.tau * sv.sigma, out=probe)
        probe += positions[:, None, :]
        logf = target.log_density(probe.reshape(c * n, d)).reshape(c, n)
        lw = quad + 0.5 * sq + logf
        mx = np.max(lw, axis=1)
        bad = ~np.isfinite(mx)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DegenerateWeightsError(
                f"all particle weights vanished in chain {first_index + i} at "
                f"t={t}; widen gamma, enlarge the particle count, or shrink "
                "the tilt",
                chain_index=first_index + i,
            )
        w = np.exp(lw - mx[:, None])
        w /= np.sum(w, axis=1, keepdims=True)
        # per-chain gemv keeps the reduction order identical to drift_mc,
        # so batched and sequential execution agree bitwise
        b = sv.tau * sv.dsigma * np.stack([w[i] @ xi[i] for i in range(c)])
        positions = positions + b * dt + np.sqrt(params.epsilon * sv.dbeta * dt) * noises[:, k]
        if not np.all(np.isfinite(positions)):
            raise ChainDivergedError(f"non-finite chain state at t={t}")
    return positions

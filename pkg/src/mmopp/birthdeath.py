"""Microscopic birth-death Markov chain and its diffusion-limit checks.

Counts n_i live on scales omega_i (individuals per density unit).  Each
species carries an event stream whose rate is the base rate (omega1/zeta
for prey, omega2 and omega3 for the predators) times the total outcome
weight at the current densities; every event applies +1/-1/0 with the
tabulated probabilities and densities are re-evaluated after each event.
The no-change channel can be simulated explicitly or thinned away; the law
of the count process is the same either way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BudgetError
from .model import ModelParams, validate_state

SMALL_OMEGA = 1e3


@dataclass(frozen=True)
class DiscreteState:
    """Integer counts plus the population scales that map them to densities."""

    n_x: int
    n_y: int
    n_z: int
    omega1: float
    omega2: float
    omega3: float

    def __post_init__(self):
        if min(self.n_x, self.n_y, self.n_z) < 0:
            raise ValueError("counts must be non-negative")
        if min(self.omega1, self.omega2, self.omega3) <= 0.0:
            raise ValueError("population scales must be positive")

    @property
    def densities(self) -> np.ndarray:
        return np.array([self.n_x / self.omega1, self.n_y / self.omega2,
                         self.n_z / self.omega3])

    @classmethod
    def from_densities(cls, state, omegas) -> "DiscreteState":
        s = validate_state(state)
        w = np.asarray(omegas, dtype=float)
        n = np.rint(s * w).astype(int)
        return cls(int(n[0]), int(n[1]), int(n[2]), w[0], w[1], w[2])


@dataclass(frozen=True)
class ChainTrajectory:
    """Event-resolved chain path: times and counts, one row per event."""

    times: np.ndarray
    counts: np.ndarray
    state: DiscreteState
    seed: int

    @property
    def densities(self) -> np.ndarray:
        w = np.array([self.state.omega1, self.state.omega2, self.state.omega3])
        return self.counts / w


def event_probabilities(p: ModelParams, state) -> np.ndarray:
    """Per-species outcome triples (P(+1), P(-1), P(0)), each summing to 1."""
    x, y, z = validate_state(state)
    p1, p2 = p.beta1 + x, p.beta2 + x
    bx = x
    dx = x * x + x * y / p1 + x * z / p2
    by = x * y / p1
    dy = p.c * y
    bz = x * z / p2
    dz = p.d * z + p.h * z * z
    out = np.empty((3, 3))
    for i, (b, d) in enumerate(((bx, dx), (by, dy), (bz, dz))):
        tot = 1.0 + b + d
        out[i] = (b / tot, d / tot, 1.0 / tot)
    return out


def simulate_chain(p: ModelParams, ds: DiscreteState, horizon: float, seed: int,
                   include_noops: bool = True,
                   max_events: int = 5_000_000) -> ChainTrajectory:
    """One chain realization over [0, horizon] in slow time.

    The expected-event budget (initial total rate times horizon) must stay
    below 1e10; the recorded event list is additionally capped by
    ``max_events``.
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if min(ds.omega1, ds.omega2, ds.omega3) < 10.0:
        raise ValueError("population scales below 10 are meaningless")
    x, y, z = ds.densities
    probs_weight = 3.0 if include_noops else 2.0  # rough channel multiplier
    rate0 = (ds.omega1 / p.zeta + ds.omega2 + ds.omega3) * probs_weight
    if rate0 * horizon > 1e10:
        raise BudgetError(
            f"expected event count {rate0 * horizon:.3g} exceeds the 1e10 budget")
    times = np.empty(max_events)
    counts = np.empty((max_events, 3), dtype=np.int64)
    status, k, t_end, nx, ny, nz = _kernels.chain_run(
        seed, ds.n_x, ds.n_y, ds.n_z, ds.omega1, ds.omega2, ds.omega3,
        p.zeta, p.beta1, p.beta2, p.c, p.d, p.h, horizon,
        include_noops, times, counts)
    if status == 1:
        raise BudgetError(f"event record cap {max_events} reached at slow time {t_end:.4g}")
    return ChainTrajectory(times=times[:k].copy(), counts=counts[:k].copy(),
                           state=ds, seed=seed)


def increment_moments_analytic(p: ModelParams, state, delta_s: float, omegas):
    """Diffusion-limit mean and variance of density increments over delta_s.

    mean = (f1/zeta, f2, f3) ds and var = (F1^2/(omega1 zeta), F2^2/omega2,
    F3^2/omega3) ds, coefficients frozen at the given state.
    """
    if not 0.0 < delta_s <= 1e-2:
        raise ValueError(f"delta_s must be in (0, 1e-2], got {delta_s}")
    x, y, z = validate_state(state)
    w = np.asarray(omegas, dtype=float)
    f1, f2, f3 = _kernels.rates(x, y, z, p.beta1, p.beta2, p.c, p.d, p.h)
    f1s, f2s, f3s = _kernels.noise_sq(x, y, z, p.beta1, p.beta2, p.c, p.d, p.h)
    mean = np.array([f1 / p.zeta, f2, f3]) * delta_s
    var = np.array([f1s / (w[0] * p.zeta), f2s / w[1], f3s / w[2]]) * delta_s
    return mean, var


@dataclass(frozen=True)
class MomentReport:
    """Chain-vs-diffusion comparison: empirical against analytic moments."""

    replicas: int
    delta_s: float
    omegas: tuple
    mean_empirical: np.ndarray
    mean_analytic: np.ndarray
    var_empirical: np.ndarray
    var_analytic: np.ndarray
    z_mean: np.ndarray
    z_var: np.ndarray
    passed: bool
    small_omega: bool

    def to_json(self, indent: int | None = 2) -> str:
        d = {
            "replicas": self.replicas,
            "delta_s": self.delta_s,
            "omegas": list(self.omegas),
            "mean_empirical": self.mean_empirical.tolist(),
            "mean_analytic": self.mean_analytic.tolist(),
            "var_empirical": self.var_empirical.tolist(),
            "var_analytic": self.var_analytic.tolist(),
            "z_mean": self.z_mean.tolist(),
            "z_var": self.z_var.tolist(),
            "passed": bool(self.passed),
            "small_omega": bool(self.small_omega),
        }
        return json.dumps(d, indent=indent)


def compare_to_diffusion(p: ModelParams, state, omegas, delta_s: float,
                         replicas: int, seed: int) -> MomentReport:
    """Monte-Carlo check that chain increments match the diffusion moments.

    Pass requires all six z-scores below 3.  Small scales (min omega below
    1e3) are flagged: the diffusion limit is not expected to hold there.
    """
    if replicas < 1000:
        raise ValueError(f"need at least 1000 replicas, got {replicas}")
    if delta_s <= 0.0:
        raise ValueError(f"delta_s must be positive, got {delta_s}")
    s0 = validate_state(state)
    w = np.asarray(omegas, dtype=float)
    ds = DiscreteState.from_densities(s0, w)
    seeds = np.random.SeedSequence(seed).generate_state(replicas).astype(np.int64)
    out = np.empty((replicas, 3))
    _kernels.chain_increment_batch(
        seeds, ds.n_x, ds.n_y, ds.n_z, w[0], w[1], w[2],
        p.zeta, p.beta1, p.beta2, p.c, p.d, p.h, delta_s, out)
    inc = out / w - ds.densities
    mean_emp = inc.mean(axis=0)
    var_emp = inc.var(axis=0, ddof=1)
    mean_ana, var_ana = increment_moments_analytic(p, s0, delta_s, w)
    se_mean = inc.std(axis=0, ddof=1) / np.sqrt(replicas)
    se_var = var_emp * np.sqrt(2.0 / (replicas - 1))
    z_mean = (mean_emp - mean_ana) / se_mean
    z_var = (var_emp - var_ana) / se_var
    passed = bool(np.all(np.abs(z_mean) < 3.0) and np.all(np.abs(z_var) < 3.0))
    return MomentReport(
        replicas=replicas, delta_s=delta_s, omegas=tuple(w),
        mean_empirical=mean_emp, mean_analytic=mean_ana,
        var_empirical=var_emp, var_analytic=var_ana,
        z_mean=z_mean, z_var=z_var, passed=passed,
        small_omega=bool(w.min() < SMALL_OMEGA))

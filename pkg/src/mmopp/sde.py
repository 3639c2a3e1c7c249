"""Time integration: deterministic RK4 and Euler-Maruyama on either timescale.

Stochastic paths draw their increments from counter-based Philox streams
keyed by (seed, path index), so ensembles reproduce bit-identically
regardless of execution order or thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _kernels
from .errors import IntegrationError
from .model import ModelParams, NoiseParams, validate_state

Scheme = Literal["rk4_deterministic", "euler_maruyama"]
BoundaryPolicy = Literal["reflect_to_zero", "absorb"]

DEFAULT_SLOW_DT = 1e-4
DEFAULT_STATS_HORIZON = 2000.0


@dataclass(frozen=True)
class SimConfig:
    """Integration run description.

    dt and t_end are in the units of the declared timescale.  save_every
    thins the stored trajectory to every k-th step (step 0 always kept).
    With boundary policy "reflect_to_zero" negative excursions are clamped
    to 0; with "absorb" the trajectory ends at the first clamped step.
    """

    dt: float = DEFAULT_SLOW_DT
    t_end: float = 10.0
    timescale: Literal["slow", "fast"] = "slow"
    scheme: Scheme = "euler_maruyama"
    seed: int = 0
    initial: np.ndarray = field(default_factory=lambda: np.array([0.3, 0.3, 0.1]))
    boundary_policy: BoundaryPolicy = "reflect_to_zero"
    save_every: int = 1

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end <= self.dt:
            raise ValueError(f"t_end = {self.t_end} must exceed dt = {self.dt}")
        if self.save_every < 1:
            raise ValueError("save_every must be >= 1")
        validate_state(self.initial)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class Trajectory:
    """Saved path: strictly increasing times and matching (n, 3) states."""

    times: np.ndarray
    states: np.ndarray
    timescale: str
    seed: int | None = None

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    def to_csv(self, path, thin: int = 1) -> None:
        """Write t,x,y,z rows with 17 significant digits."""
        with open(path, "w") as fh:
            fh.write("t,x,y,z\n")
            for t, (x, y, z) in zip(self.times[::thin], self.states[::thin]):
                fh.write(f"{t:.17g},{x:.17g},{y:.17g},{z:.17g}\n")


def path_stream(seed: int, path: int = 0) -> np.random.Generator:
    """Counter-based normal stream for one path, keyed by (seed, path)."""
    key = np.array([seed, path], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def worker_count(n_jobs: int) -> int:
    """Thread count for ensemble work, capped by the MMO_THREADS variable."""
    cap = os.cpu_count() or 1
    env = os.environ.get("MMO_THREADS")
    if env:
        cap = min(cap, max(1, int(env)))
    return max(1, min(cap, n_jobs))


def _scales(p: ModelParams, n: NoiseParams | None, timescale: str):
    rz = np.sqrt(p.zeta)
    if timescale == "slow":
        a = (1.0 / p.zeta, 1.0, 1.0)
        g = (0.0, 0.0, 0.0) if n is None else (n.sigma1 / rz, n.sigma2, n.sigma3)
    elif timescale == "fast":
        a = (1.0, p.zeta, p.zeta)
        g = (0.0, 0.0, 0.0) if n is None else (n.sigma1, rz * n.sigma2, rz * n.sigma3)
    else:
        raise ValueError(f"unknown timescale {timescale!r}")
    return a, g


def integrate_deterministic(p: ModelParams, cfg: SimConfig) -> Trajectory:
    """Classical RK4 for the drift-only system."""
    if cfg.scheme != "rk4_deterministic":
        raise ValueError(f"scheme must be rk4_deterministic, got {cfg.scheme}")
    a, _ = _scales(p, None, cfg.timescale)
    n_steps = cfg.n_steps
    out = np.empty((n_steps // cfg.save_every + 1, 4))
    x, y, z = validate_state(cfg.initial)
    status, rows, done = _kernels.rk4_path(
        x, y, z, p.beta1, p.beta2, p.c, p.d, p.h, a[0], a[1], a[2],
        cfg.dt, n_steps, cfg.save_every, out)
    if status == _kernels.NONFINITE:
        raise IntegrationError(
            f"non-finite state at step {done}; last valid time {(done - 1) * cfg.dt}")
    return Trajectory(times=out[:rows, 0].copy(), states=out[:rows, 1:].copy(),
                      timescale=cfg.timescale, seed=None)


def integrate_em(p: ModelParams, n: NoiseParams, cfg: SimConfig,
                 increments: np.ndarray | None = None) -> Trajectory:
    """Euler-Maruyama for the Ito system on the configured timescale.

    X_{k+1} = X_k + drift dt + diffusion dW with dW drawn as sqrt(dt) times
    independent standard normal triples from the (seed, 0) stream.  Passing
    ``increments`` (shape (n_steps, 3) of Brownian increments) overrides the
    stream; used by the convergence studies to couple refinements.
    """
    if cfg.scheme != "euler_maruyama":
        raise ValueError(f"scheme must be euler_maruyama, got {cfg.scheme}")
    return _em_path(p, n, cfg, path=0, increments=increments)


def _em_path(p: ModelParams, n: NoiseParams, cfg: SimConfig, path: int,
             increments: np.ndarray | None = None) -> Trajectory:
    a, g = _scales(p, n, cfg.timescale)
    policy = (_kernels.POLICY_REFLECT if cfg.boundary_policy == "reflect_to_zero"
              else _kernels.POLICY_ABSORB)
    n_steps = cfg.n_steps
    out = np.empty((n_steps // cfg.save_every + 1, 4))
    st = validate_state(cfg.initial).copy()
    out[0] = (0.0, st[0], st[1], st[2])
    if increments is None:
        status, done, krow = _kernels.em_path(
            st, p.beta1, p.beta2, p.c, p.d, p.h, a[0], a[1], a[2],
            g[0], g[1], g[2], cfg.dt, path_stream(cfg.seed, path), n_steps,
            cfg.save_every, out, policy)
    else:
        increments = np.asarray(increments, dtype=float)
        if increments.shape != (n_steps, 3):
            raise ValueError(f"increments must have shape ({n_steps}, 3)")
        status, done, krow = _kernels.em_chunk(
            st, p.beta1, p.beta2, p.c, p.d, p.h, a[0], a[1], a[2],
            g[0], g[1], g[2], cfg.dt, increments, 0, cfg.save_every, out, 1, policy)
    if status == _kernels.STEP_TOO_LARGE:
        raise IntegrationError(
            f"path {path}: drift*dt exceeds 0.5 at step {done}: reduce dt = {cfg.dt}")
    if status == _kernels.NONFINITE:
        raise IntegrationError(
            f"path {path}: non-finite state at step {done}; "
            f"last valid time {(done - 1) * cfg.dt}")
    return Trajectory(times=out[:krow, 0].copy(), states=out[:krow, 1:].copy(),
                      timescale=cfg.timescale, seed=cfg.seed)


def run_ensemble(p: ModelParams, n: NoiseParams, cfg: SimConfig, count: int) -> list[Trajectory]:
    """Independent paths i = 0..count-1 on streams keyed (seed, i).

    Results are ordered by path index and identical for any worker count.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if cfg.scheme != "euler_maruyama":
        raise ValueError(f"ensembles require euler_maruyama, got {cfg.scheme}")
    workers = worker_count(count)
    if workers == 1:
        return [_em_path(p, n, cfg, i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_em_path, p, n, cfg, i) for i in range(count)]
        return [f.result() for f in futures]


def map_ensemble(fn, p: ModelParams, n: NoiseParams, cfg: SimConfig, count: int) -> list:
    """Apply ``fn`` to each ensemble path as it completes, keeping only the
    reduced results (memory-bounded alternative to run_ensemble)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")

    def job(i: int):
        return fn(_em_path(p, n, cfg, i))

    workers = worker_count(count)
    if workers == 1:
        return [job(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job, i) for i in range(count)]
        return [f.result() for f in futures]

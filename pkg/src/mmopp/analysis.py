"""Oscillation taxonomy, inter-spike SAO counts, and the return-map study.

An oscillation event is a local maximum of the (median-smoothed) x series
together with its neighbouring minima.  Events whose peak-to-trough range
stays at or below 0.1 are ignored as noise ripples; among the rest, a peak
reaching 0.6 is a spike (LAO) and anything below is an SAO.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.ndimage import median_filter

from . import _kernels
from .errors import IntegrationError
from .model import ModelParams, NoiseParams, drift
from .sde import SimConfig, Trajectory, map_ensemble, path_stream, worker_count

SAO_MIN_AMPLITUDE = 0.1
LAO_PEAK = 0.6
SMOOTH_WINDOW = 5
RESAMPLING_GUARD = 0.05

SECTION_X = 0.18
LINE_Y = 0.22
Z_WINDOW = (0.05, 0.18)
EXCLUSION = 0.02
RETURN_BUDGET = 500.0

@dataclass(frozen=True)
class OscillationEvent:
    kind: Literal["SAO", "LAO"]
    t_start: float
    t_peak: float
    t_end: float
    amplitude: float


def classify_oscillations(traj: Trajectory, smooth_window: int = SMOOTH_WINDOW
                          ) -> list[OscillationEvent]:
    """Ordered, disjoint oscillation events extracted from the x series.

    Raises if consecutive x samples can jump by 0.05 or more (the series
    would be too coarse to separate SAOs from spikes).
    """
    t, x = traj.times, traj.x
    if len(x) >= 2 and np.max(np.abs(np.diff(x))) >= RESAMPLING_GUARD:
        raise ValueError("undersampled trajectory: consecutive x samples differ "
                         f"by >= {RESAMPLING_GUARD}; save more finely")
    if len(x) < 2 * smooth_window:
        return []
    xs = median_filter(x, size=smooth_window, mode="nearest")
    dx = np.diff(xs)
    sgn = np.sign(dx)
    sgn[sgn == 0] = 1
    turns = np.nonzero(np.diff(sgn))[0] + 1
    if len(turns) < 3:
        return []
    kinds = np.where(sgn[turns - 1] > 0, 1, -1)
    events: list[OscillationEvent] = []
    for j in range(1, len(turns) - 1):
        if kinds[j] != 1 or kinds[j - 1] != -1 or kinds[j + 1] != -1:
            continue
        lo, pk, hi = turns[j - 1], turns[j], turns[j + 1]
        amplitude = xs[pk] - max(xs[lo], xs[hi])
        if amplitude <= SAO_MIN_AMPLITUDE:
            continue
        events.append(OscillationEvent(
            kind="LAO" if xs[pk] >= LAO_PEAK else "SAO",
            t_start=float(t[lo]), t_peak=float(t[pk]), t_end=float(t[hi]),
            amplitude=float(amplitude)))
    return events


def sao_counts_between_spikes(events: Sequence[OscillationEvent]) -> list[int]:
    """SAO counts strictly between consecutive spikes; partial gaps dropped."""
    counts: list[int] = []
    current = 0
    seen_spike = False
    for ev in events:
        if ev.kind == "LAO":
            if seen_spike:
                counts.append(current)
            current = 0
            seen_spike = True
        elif seen_spike:
            current += 1
    return counts


@dataclass(frozen=True)
class SaoHistogram:
    """Integer-binned distribution of the inter-spike SAO count N."""

    counts: dict[int, int]
    n_paths: int
    total: int

    def frequencies(self) -> np.ndarray:
        """Dense bin counts for N = 0..max observed (empty -> length 0)."""
        if not self.counts:
            return np.zeros(0, dtype=int)
        out = np.zeros(max(self.counts) + 1, dtype=int)
        for n, c in self.counts.items():
            out[n] = c
        return out


def build_histogram(counts, n_paths: int = 1) -> SaoHistogram:
    flat = [int(c) for c in counts]
    if any(c < 0 for c in flat):
        raise ValueError("SAO counts must be non-negative")
    return SaoHistogram(counts=dict(Counter(flat)), n_paths=n_paths, total=len(flat))


def histogram_to_csv(hist: SaoHistogram, path) -> None:
    freq = hist.frequencies()
    with open(path, "w") as fh:
        fh.write("N,count\n")
        for n, c in enumerate(freq):
            fh.write(f"{n},{c}\n")


def sao_count_ensemble(p: ModelParams, n: NoiseParams, count: int, seed: int,
                       t_end: float = 2000.0, dt: float = 1e-4,
                       save_every: int = 10,
                       initial=(0.3, 0.3, 0.1)) -> list[list[int]]:
    """Per-path inter-spike SAO counts for a seeded ensemble.

    Paths are integrated on the slow scale, classified, and reduced one at
    a time, so memory stays bounded by the worker count.
    """
    cfg = SimConfig(dt=dt, t_end=t_end, timescale="slow", scheme="euler_maruyama",
                    seed=seed, initial=np.asarray(initial, dtype=float),
                    save_every=save_every)
    return map_ensemble(
        lambda traj: sao_counts_between_spikes(classify_oscillations(traj)),
        p, n, cfg, count)


@dataclass(frozen=True)
class ReturnMapSample:
    """First-return data for one trajectory launched on the section.

    x1 records the interpolated crossing abscissa (equal to the section
    level up to rounding) so the on-section invariant stays checkable.
    """

    z0: float
    y1: float
    z1: float
    return_time: float
    path: int
    status: Literal["ok", "timeout", "extinct"]
    x1: float = float("nan")


def _one_return(p: ModelParams, g: tuple, z0: float, seed: int, path: int,
                dt: float, section_x: float, line_y: float, exclusion: float,
                budget: float) -> ReturnMapSample:
    start = np.array([section_x, line_y, z0])
    direction = 1 if drift(p, start, "slow")[0] >= 0.0 else -1
    st = start.copy()
    n_max = int(round(budget / dt))
    status, steps, xp, yp, zp = _kernels.em_to_crossing(
        st, p.beta1, p.beta2, p.c, p.d, p.h,
        1.0 / p.zeta, 1.0, 1.0, g[0], g[1], g[2],
        dt, path_stream(seed, path), n_max, section_x, exclusion, direction)
    if status == _kernels.CROSSED:
        lam = (section_x - xp) / (st[0] - xp)
        return ReturnMapSample(
            z0=z0, y1=float(yp + lam * (st[1] - yp)),
            z1=float(zp + lam * (st[2] - zp)),
            return_time=steps * dt, path=path, status="ok",
            x1=float(xp + lam * (st[0] - xp)))
    if status == _kernels.ABSORBED:
        return ReturnMapSample(z0=z0, y1=np.nan, z1=np.nan,
                               return_time=steps * dt, path=path, status="extinct")
    if status == _kernels.NONFINITE:
        raise IntegrationError(f"return-map path {path}: non-finite state")
    return ReturnMapSample(z0=z0, y1=np.nan, z1=np.nan,
                           return_time=budget, path=path, status="timeout")


def return_map(p: ModelParams, n: NoiseParams, seed: int, grid_size: int = 1000,
               z_window: tuple = Z_WINDOW, section_x: float = SECTION_X,
               line_y: float = LINE_Y, exclusion: float = EXCLUSION,
               dt: float = 1e-4, budget: float = RETURN_BUDGET
               ) -> list[ReturnMapSample]:
    """Stochastic first-return map of the section {x = section_x}.

    One sample path per grid point on the launch segment (y = line_y,
    z0 equally spaced in z_window); a return is the first re-crossing in
    the departure direction after the path has left |x - section_x| >
    exclusion.  Crossing states are linearly interpolated onto the section.
    """
    if grid_size < 1:
        raise ValueError(f"grid_size must be >= 1, got {grid_size}")
    rz = np.sqrt(p.zeta)
    g = (n.sigma1 / rz, n.sigma2, n.sigma3)
    z0s = np.linspace(z_window[0], z_window[1], grid_size)

    def job(i: int) -> ReturnMapSample:
        return _one_return(p, g, float(z0s[i]), seed, i, dt,
                           section_x, line_y, exclusion, budget)

    workers = worker_count(grid_size)
    if workers == 1:
        return [job(i) for i in range(grid_size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, range(grid_size)))


def returnmap_to_csv(samples: Sequence[ReturnMapSample], path) -> None:
    with open(path, "w") as fh:
        fh.write("z0,y1,z1,return_time,status\n")
        for s in samples:
            fh.write(f"{s.z0:.17g},{s.y1:.17g},{s.z1:.17g},"
                     f"{s.return_time:.17g},{s.status}\n")


def plateau_indicator(samples: Sequence[ReturnMapSample]) -> float:
    """Median |second difference| of z1 over the z0 grid.

    Small values mean the map is close to linear (no plateau); windows
    touching failed returns are skipped.
    """
    z1 = np.array([s.z1 if s.status == "ok" else np.nan for s in samples])
    d2 = np.abs(z1[2:] - 2.0 * z1[1:-1] + z1[:-2])
    d2 = d2[np.isfinite(d2)]
    if len(d2) == 0:
        raise ValueError("no valid consecutive return triples")
    return float(np.median(d2))

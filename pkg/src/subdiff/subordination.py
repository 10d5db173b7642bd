"""Path-level machinery for subordinated Brownian motion.

Builds grid-sampled subordinator paths, evaluates the inverse subordinator
by the grid-crossing rule, and assembles trajectories Y(t) = B(S(t)) from
independent Gaussian increments with variance equal to the operational-time
increments. Ensembles derive one pair of random streams per trajectory from
a master seed, so results are reproducible bit for bit regardless of how
the work is scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import (GammaSpec, RngStream, StableSpec, SubordinatorSpec,
                            TemperedStableSpec, sample_gamma_increment,
                            sample_stable_increment, sample_tempered_stable)
from .errors import BudgetError, CoverageError, DomainError

DEFAULT_MAX_STEPS = 10 ** 8


@dataclass(frozen=True, eq=False)
class SubordinatorPath:
    """Grid-sampled nondecreasing path of the operational-time process."""

    dtau: float
    values: np.ndarray
    spec: SubordinatorSpec

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise DomainError("path values must be a nonempty 1-d array")
        if vals[0] != 0.0:
            raise DomainError("path must start at 0")
        if np.any(np.diff(vals) < 0.0):
            raise DomainError("path values must be nondecreasing")
        if not (isinstance(self.dtau, (int, float, np.floating))
                and math.isfinite(float(self.dtau)) and float(self.dtau) > 0.0):
            raise DomainError(f"dtau must be > 0, got {self.dtau!r}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dtau", float(self.dtau))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One realization of the subordinated motion on a physical time grid."""

    t_grid: np.ndarray
    s_values: np.ndarray
    y_values: np.ndarray
    seed_info: tuple[int, int] | None = None


def _draw_increments(spec: SubordinatorSpec, scale_t: float, rng, n: int) -> np.ndarray:
    if isinstance(spec, StableSpec):
        return sample_stable_increment(spec.alpha, scale_t, rng, size=n)
    if isinstance(spec, TemperedStableSpec):
        return sample_tempered_stable(spec.alpha, spec.lam, spec.c, scale_t, rng, size=n)
    if isinstance(spec, GammaSpec):
        return sample_gamma_increment(spec.a, spec.c, scale_t, rng, size=n)
    raise DomainError(f"unsupported spec type {type(spec).__name__}")


def simulate_subordinator_path(spec: SubordinatorSpec, dtau: float, t_max: float,
                               rng, max_steps: int = DEFAULT_MAX_STEPS) -> SubordinatorPath:
    """Simulate the subordinator on a dtau grid until it exceeds t_max.

    The returned path ends at its first value above t_max, so the inverse
    is well defined on [0, t_max]. Raises BudgetError if the level is not
    crossed within max_steps increments.
    """
    if not (isinstance(t_max, (int, float, np.floating))
            and math.isfinite(float(t_max)) and float(t_max) > 0.0):
        raise DomainError(f"t_max must be > 0, got {t_max!r}")
    if not (isinstance(dtau, (int, float, np.floating))
            and math.isfinite(float(dtau)) and float(dtau) > 0.0):
        raise DomainError(f"dtau must be > 0, got {dtau!r}")
    t_max = float(t_max)
    chunks = [np.zeros(1)]
    total = 0.0
    n_steps = 0
    block = 1024
    while total <= t_max:
        if n_steps >= max_steps:
            raise BudgetError(
                f"subordinator path did not cross t_max={t_max} within "
                f"{max_steps} steps (reached {total})")
        block = min(block, max_steps - n_steps)
        inc = _draw_increments(spec, float(dtau), rng, block)
        csum = total + np.cumsum(inc)
        chunks.append(csum)
        total = float(csum[-1])
        n_steps += block
        block = min(2 * block, 1 << 22)
    values = np.concatenate(chunks)
    cross = int(np.searchsorted(values, t_max, side="right"))
    return SubordinatorPath(dtau=float(dtau), values=values[:cross + 1], spec=spec)


def inverse_subordinator(path: SubordinatorPath, t):
    """First-passage time of the path above level t, on the path's grid.

    Returns dtau * (n - 1) where n is the first grid index whose value
    exceeds t. Accepts a scalar or array t; nondecreasing and right
    continuous in t. Raises CoverageError where the path never exceeds t.
    """
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise DomainError("inverse_subordinator requires finite t >= 0")
    values = path.values
    if np.any(arr >= values[-1]):
        raise CoverageError(
            f"path (last value {values[-1]}) does not cover requested t")
    idx = np.searchsorted(values, arr, side="right")
    s = path.dtau * (idx - 1.0)
    return float(s) if np.isscalar(t) or arr.ndim == 0 else s


def simulate_trajectory(spec: SubordinatorSpec, t_grid, dtau: float, rng_pair,
                        max_steps: int = DEFAULT_MAX_STEPS) -> Trajectory:
    """Simulate Y(t) = B(S(t)) on the given physical time grid.

    rng_pair supplies two independent streams, the first for the
    subordinator path and the second for the Brownian increments. Gaussian
    increments carry variance S(t_i) - S(t_i-1); zero operational-time
    increments yield exactly repeated Y values.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise DomainError("t_grid must be a nonempty 1-d array")
    if grid[0] != 0.0:
        raise DomainError("t_grid must start at 0")
    if grid.size > 1 and np.any(np.diff(grid) <= 0.0):
        raise DomainError("t_grid must be strictly increasing")
    if not np.all(np.isfinite(grid)):
        raise DomainError("t_grid must be finite")
    rng_u, rng_b = rng_pair
    path = simulate_subordinator_path(spec, dtau, float(grid[-1]) if grid[-1] > 0
                                      else dtau, rng_u, max_steps=max_steps)
    s = inverse_subordinator(path, grid)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    ds = np.diff(s)
    gen = rng_b.generator if isinstance(rng_b, RngStream) else rng_b
    steps = np.sqrt(ds) * gen.standard_normal(ds.size)
    y = np.concatenate([[0.0], np.cumsum(steps)])
    seed_info = None
    if isinstance(rng_u, RngStream):
        seed_info = (rng_u.master_seed, rng_u.stream_index)
    return Trajectory(t_grid=grid, s_values=s, y_values=y, seed_info=seed_info)


def _ensemble_one(args):
    spec, grid, dtau, master_seed, stream_offset, i, max_steps = args
    rng_u = RngStream(master_seed, stream_offset + 2 * i)
    rng_b = RngStream(master_seed, stream_offset + 2 * i + 1)
    traj = simulate_trajectory(spec, grid, dtau, (rng_u, rng_b), max_steps=max_steps)
    return i, traj.s_values, traj.y_values


def simulate_ensemble(spec: SubordinatorSpec, t_grid, dtau: float, n_traj: int,
                      master_seed: int, workers: int = 1, stream_offset: int = 0,
                      max_steps: int = DEFAULT_MAX_STEPS) -> list[Trajectory]:
    """Simulate n_traj independent trajectories on a shared grid.

    Trajectory i always consumes the stream pair (stream_offset + 2i,
    stream_offset + 2i + 1) of the master seed, so the result is identical
    for any worker count; workers > 1 parallelizes across processes.
    """
    if not isinstance(n_traj, (int, np.integer)) or n_traj < 1:
        raise DomainError(f"n_traj must be a positive integer, got {n_traj!r}")
    if not isinstance(workers, (int, np.integer)) or workers < 1:
        raise DomainError(f"workers must be a positive integer, got {workers!r}")
    grid = np.asarray(t_grid, dtype=float)
    jobs = [(spec, grid, float(dtau), int(master_seed), int(stream_offset), i, max_steps)
            for i in range(int(n_traj))]
    results: list = [None] * int(n_traj)
    if workers == 1:
        for job in jobs:
            i, s, y = _ensemble_one(job)
            results[i] = (s, y)
    else:
        chunk = max(1, int(n_traj) // (4 * int(workers)))
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            for i, s, y in pool.map(_ensemble_one, jobs, chunksize=chunk):
                results[i] = (s, y)
    out = []
    for i, (s, y) in enumerate(results):
        out.append(Trajectory(t_grid=grid, s_values=s, y_values=y,
                              seed_info=(int(master_seed), int(stream_offset) + 2 * i)))
    return out

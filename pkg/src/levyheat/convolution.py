"""Space-time fields and the stochastic convolution ``u(t) = int_0^t T_{t-s} g(s) dX_s``.

Time is discretised on uniform nodes ``t_n = n T / M``.  A space-time field
holds one frame per node and is read as the left-continuous step function
``g(s) = g(t_m)`` for ``s`` in ``[t_m, t_{m+1})``.  All semigroup actions are
exact diagonal multipliers in Fourier space.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ContractError, SingularityError
from .grid import (
    HEAT,
    Field,
    GridSpec,
    Rep,
    Semigroup,
    fft_coeffs,
    ifft_values,
    is_mean_zero,
    lp_norm_coeffs,
    lp_norm_values,
)
from .levy import LevyMeasureSpec, JumpPath, beta_moment, path_rng, sample_path
from .littlewood_paley import besov_norm_coeffs, build_partition, sobolev_weights

EXACT_JUMP = "exact"
EULER_GRID = "euler"

# complex entries materialised at once in batched lag evaluations
_LAG_BUDGET = 1 << 22


@dataclass(frozen=True)
class TimeGrid:
    T: float = 1.0
    steps: int = 100

    def __post_init__(self):
        if not self.T > 0:
            raise ContractError(f"horizon must be positive, got {self.T}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ContractError(f"steps must be a positive integer, got {self.steps}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.steps * factor)


class SpaceTimeField:
    """One physical frame per time node, stacked as ``(M + 1, *grid.shape)``."""

    def __init__(self, grid: GridSpec, tgrid: TimeGrid, values):
        v = np.array(values, dtype=complex)
        expected = (tgrid.steps + 1,) + grid.shape
        if v.shape != expected:
            v = v.reshape(expected)
        v.setflags(write=False)
        self.grid = grid
        self.tgrid = tgrid
        self.values = v
        self._coeffs = None

    @classmethod
    def from_frames(cls, frames, tgrid: TimeGrid) -> "SpaceTimeField":
        frames = list(frames)
        if len(frames) != tgrid.steps + 1:
            raise ContractError(f"need {tgrid.steps + 1} frames, got {len(frames)}")
        grid = frames[0].grid
        if any(f.grid != grid for f in frames):
            raise ContractError("all frames must share one grid")
        return cls(grid, tgrid, np.stack([f.samples() for f in frames]))

    @classmethod
    def constant(cls, f: Field, tgrid: TimeGrid) -> "SpaceTimeField":
        return cls(f.grid, tgrid, np.broadcast_to(f.samples(), (tgrid.steps + 1,) + f.grid.shape))

    @classmethod
    def from_coeffs(cls, grid: GridSpec, tgrid: TimeGrid, coeffs) -> "SpaceTimeField":
        out = cls(grid, tgrid, ifft_values(np.asarray(coeffs), grid))
        c = np.array(coeffs, dtype=complex)
        c.setflags(write=False)
        out._coeffs = c
        return out

    @classmethod
    def zeros(cls, grid: GridSpec, tgrid: TimeGrid) -> "SpaceTimeField":
        return cls(grid, tgrid, np.zeros((tgrid.steps + 1,) + grid.shape))

    def __len__(self):
        return self.tgrid.steps + 1

    def frame(self, n: int) -> Field:
        return Field(self.grid, self.values[n], Rep.PHYSICAL)

    def frames(self) -> list[Field]:
        return [self.frame(n) for n in range(len(self))]

    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            c = fft_coeffs(self.values, self.grid)
            c.setflags(write=False)
            self._coeffs = c
        return self._coeffs

    def map_frames(self, fn: Callable[[Field], Field]) -> "SpaceTimeField":
        return SpaceTimeField.from_frames([fn(f) for f in self.frames()], self.tgrid)

    def multiply(self, symbol: np.ndarray) -> "SpaceTimeField":
        """Apply one Fourier symbol (array on the lattice) to every frame."""
        return SpaceTimeField.from_coeffs(self.grid, self.tgrid, self.coeffs() * symbol)

    def is_time_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def is_mean_zero(self) -> bool:
        return is_mean_zero(self.coeffs(), self.grid)

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.tgrid, self.values + other.values)

    def __mul__(self, scalar) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.tgrid, self.values * scalar)

    __rmul__ = __mul__


def evolve(g: SpaceTimeField, t: int, s: int, kind: Semigroup = HEAT) -> Field:
    """Semigroup applied to frame ``s`` for the elapsed time ``t_t - t_s`` (node indices)."""
    if s > t:
        raise ContractError(f"evolve needs s <= t, got s={s}, t={t}")
    if not 0 <= s <= g.tgrid.steps or t > g.tgrid.steps:
        raise ContractError("node index outside the time grid")
    return kind.apply(g.frame(s), (t - s) * g.tgrid.dt)


def _lag_norms_p(c0: np.ndarray, lam: np.ndarray, lags: np.ndarray, dt: float,
                 grid: GridSpec, p: float) -> np.ndarray:
    """``||T_{k dt} f||_p^p`` for every lag ``k``, with ``f`` given by ``c0``."""
    out = np.empty(lags.size)
    chunk = max(1, _LAG_BUDGET // grid.size)
    for start in range(0, lags.size, chunk):
        k = lags[start:start + chunk]
        decay = np.exp(-np.multiply.outer(k * dt, lam))
        out[start:start + chunk] = lp_norm_coeffs(c0 * decay, grid, p) ** p
    return out


def prop1_lhs(g: SpaceTimeField, p: float, kind: Semigroup = HEAT) -> float:
    """``sum_n dt sum_{m<n} dt ||T_{t_n - t_m} g(t_m)||_p^p`` over ``n = 0..M-1``.

    Left endpoints in both variables; the lag is at least one step.
    """
    if not p >= 1:
        raise ContractError(f"L^p exponent must be >= 1, got {p}")
    M, dt = g.tgrid.steps, g.tgrid.dt
    if M < 2:
        return 0.0
    c = g.coeffs()
    lam = kind.rates(g.grid)
    if g.is_time_constant():
        lags = np.arange(1, M)
        a = _lag_norms_p(c[0], lam, lags, dt, g.grid, p)
        return float(dt * dt * np.sum((M - lags) * a))
    total = 0.0
    for m in range(M - 1):
        lags = np.arange(1, M - m)
        total += _lag_norms_p(c[m], lam, lags, dt, g.grid, p).sum()
    return float(dt * dt * total)


def quadratic_variation_term(g: SpaceTimeField, p: float, kind: Semigroup = HEAT) -> float:
    """``sum_n dt || (sum_{m<n} dt |T_{t_n - t_m} g(t_m)|^2)^(1/2) ||_p^p``."""
    M, dt = g.tgrid.steps, g.tgrid.dt
    c = g.coeffs()
    lam = kind.rates(g.grid)
    total = 0.0
    for n in range(1, M):
        lags = np.arange(n, 0, -1)
        decay = np.exp(-np.multiply.outer(lags * dt, lam))
        vals = ifft_values(c[:n] * decay, g.grid)
        q = np.sqrt(dt * (np.abs(vals) ** 2).sum(axis=0))
        total += float(lp_norm_values(q, g.grid, p)) ** p
    return dt * total


def _cell_weight(lam: np.ndarray, dt: float) -> np.ndarray:
    """``int_0^dt exp(-lam u) du``, continuous at ``lam = 0``."""
    x = lam * dt
    out = np.full(lam.shape, dt)
    nz = x > 0
    out[nz] = -np.expm1(-x[nz]) / lam[nz]
    return out


def drift_coeffs(gc: np.ndarray, lam: np.ndarray, tgrid: TimeGrid) -> np.ndarray:
    """``D_n = sum_{m<n} int_{t_m}^{t_{m+1}} T_{t_n - s} g(t_m) ds`` in Fourier space."""
    M, dt = tgrid.steps, tgrid.dt
    step = np.exp(-lam * dt)
    w = _cell_weight(lam, dt)
    out = np.zeros(gc.shape, dtype=complex)
    for n in range(1, M + 1):
        out[n] = step * out[n - 1] + w * gc[n - 1]
    return out


def _check_horizon(path: JumpPath, tgrid: TimeGrid):
    if not math.isclose(path.horizon, tgrid.T, rel_tol=1e-12):
        raise ContractError(f"path horizon {path.horizon} does not match time grid {tgrid.T}")


def convolution_coeffs(gc: np.ndarray, lam: np.ndarray, tgrid: TimeGrid, path: JumpPath,
                       scheme: str = EXACT_JUMP, drift: np.ndarray | None = None) -> np.ndarray:
    """Fourier coefficients of the stochastic convolution at every node.

    ``exact``: each jump contributes ``z T_{t_n - tau} g(floor(tau))`` at all
    ``t_n >= tau``; the compensator is integrated exactly over each cell, so
    the result is a martingale transform with mean zero.
    ``euler``: ``sum_{m<n} T_{t_n - t_m} g(t_m) (X_{t_{m+1}} - X_{t_m})``.
    """
    _check_horizon(path, tgrid)
    nodes = tgrid.nodes
    M, dt = tgrid.steps, tgrid.dt
    if scheme == EXACT_JUMP:
        u = np.zeros(gc.shape, dtype=complex)
        if path.times.size:
            first = np.searchsorted(nodes, path.times, side="left")
            last = np.searchsorted(nodes, path.times, side="right") - 1
            for tau, z, n0, b in zip(path.times, path.sizes, first, last):
                if n0 > M:
                    continue
                lag = nodes[n0:] - tau
                u[n0:] += z * np.exp(-np.multiply.outer(lag, lam)) * gc[b]
        if path.mean_rate != 0.0:
            if drift is None:
                drift = drift_coeffs(gc, lam, tgrid)
            u -= path.mean_rate * drift
        return u
    if scheme == EULER_GRID:
        dX = path.increments(nodes)
        step = np.exp(-lam * dt)
        u = np.zeros(gc.shape, dtype=complex)
        for n in range(1, M + 1):
            u[n] = step * (u[n - 1] + gc[n - 1] * dX[n - 1])
        return u
    raise ContractError(f"unknown scheme {scheme!r}")


def stochastic_convolution(g: SpaceTimeField, path: JumpPath, scheme: str = EXACT_JUMP,
                           kind: Semigroup = HEAT) -> SpaceTimeField:
    """``u(t_n) = int_0^{t_n} T_{t_n - s} g(s) dX_s`` on every node."""
    _check_horizon(path, g.tgrid)
    u = convolution_coeffs(g.coeffs(), kind.rates(g.grid), g.tgrid, path, scheme)
    return SpaceTimeField.from_coeffs(g.grid, g.tgrid, u)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int
    values: np.ndarray

    def within(self, target: float, n_se: float = 4.0) -> bool:
        return abs(self.mean - target) <= n_se * self.stderr


@dataclass(frozen=True)
class FrameNorm:
    """Spatial norm raised to ``p`` and integrated in time over ``n = 0..M-1``."""

    kind: str = "sobolev"
    k: float = 0.0
    p: float = 2.0
    homogeneous: bool = False

    def __post_init__(self):
        if self.kind not in ("sobolev", "besov"):
            raise ContractError(f"unknown frame norm {self.kind!r}")
        if not self.p >= 1:
            raise ContractError(f"L^p exponent must be >= 1, got {self.p}")

    def time_integral(self, coeffs: np.ndarray, grid: GridSpec, dt: float) -> float:
        c = coeffs[:-1]
        if self.kind == "sobolev":
            norms = lp_norm_coeffs(c * sobolev_weights(grid, self.k, self.homogeneous), grid, self.p)
        else:
            norms = besov_norm_coeffs(c, build_partition(grid), self.k, self.p, self.homogeneous)
        return float(dt * np.sum(norms ** self.p))


def frame_norm_integral(g: SpaceTimeField, norm: FrameNorm) -> float:
    """Deterministic ``sum_n dt ||g(t_n)||^p`` for the chosen norm."""
    if norm.homogeneous and not g.is_mean_zero():
        raise SingularityError("homogeneous norms need mean-zero frames")
    return norm.time_integral(g.coeffs(), g.grid, g.tgrid.dt)


GSource = Union[SpaceTimeField, Callable[[np.random.Generator], SpaceTimeField]]


@dataclass(frozen=True, eq=False)
class _MCJob:
    g: GSource
    nu: LevyMeasureSpec
    norm: FrameNorm
    kind: Semigroup
    seed: int
    scheme: str


def _path_value(job: _MCJob, index: int, cache: dict) -> float:
    rng = path_rng(job.seed, index)
    if callable(job.g):
        g = job.g(rng)
        drift = None
    else:
        g = job.g
        if "drift" not in cache:
            cache["drift"] = drift_coeffs(g.coeffs(), job.kind.rates(g.grid), g.tgrid)
        drift = cache["drift"]
    if job.norm.homogeneous and not g.is_mean_zero():
        raise SingularityError("homogeneous norms need mean-zero g frames")
    path = sample_path(job.nu, g.tgrid.T, rng)
    u = convolution_coeffs(g.coeffs(), job.kind.rates(g.grid), g.tgrid, path, job.scheme, drift)
    return job.norm.time_integral(u, g.grid, g.tgrid.dt)


def _run_chunk(job: _MCJob, start: int, stop: int) -> np.ndarray:
    cache: dict = {}
    return np.array([_path_value(job, i, cache) for i in range(start, stop)])


def mc_norm(g: GSource, nu: LevyMeasureSpec, norm: FrameNorm, samples: int, seed: int,
            kind: Semigroup = HEAT, workers: int = 1, scheme: str = EXACT_JUMP) -> MCEstimate:
    """Sample mean of ``sum_n dt ||u(t_n)||^p`` over independent paths.

    Path ``i`` always uses stream ``(seed, i)`` and values are reduced in
    index order, so the estimate does not depend on ``workers``.
    """
    if samples < 2:
        raise ContractError(f"need at least 2 samples, got {samples}")
    if not callable(g) and norm.homogeneous and not g.is_mean_zero():
        raise SingularityError("homogeneous norms need mean-zero g frames")
    job = _MCJob(g, nu, norm, kind, int(seed), scheme)
    if workers <= 1:
        values = _run_chunk(job, 0, samples)
    else:
        bounds = np.linspace(0, samples, workers + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_run_chunk, [job] * workers, bounds[:-1], bounds[1:])
            values = np.concatenate(list(parts))
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples))
    return MCEstimate(mean, stderr, samples, values)


def mc_solution_norm(g: GSource, nu: LevyMeasureSpec, k: float = 0.0, p: float = 2.0,
                     homogeneous: bool = False, samples: int = 1000, seed: int = 0,
                     kind: Semigroup = HEAT, workers: int = 1) -> MCEstimate:
    """Monte Carlo estimate of ``E sum_n dt ||u(t_n)||_{H^k_p}^p`` (exact-jump scheme)."""
    return mc_norm(g, nu, FrameNorm("sobolev", k, p, homogeneous), samples, seed, kind, workers)


def isometry_value(g: SpaceTimeField, nu: LevyMeasureSpec, kind: Semigroup = HEAT) -> float:
    """``beta_2 * prop1_lhs(g, 2)``: the second moment predicted by the isometry."""
    return beta_moment(nu, 2) * prop1_lhs(g, 2, kind)

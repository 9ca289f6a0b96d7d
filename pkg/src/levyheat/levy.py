"""Finite-activity Levy measures and compensated compound Poisson paths.

The driver is the pure-jump martingale

    X_t = sum_{tau_i <= t} z_i - t * mu1,    mu1 = int z nu(dz),

with jump times from a Poisson process of rate ``Lambda = nu(R \\ {0})`` and
jump sizes drawn from ``nu / Lambda``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import ContractError, InfiniteMomentError

QUAD_RTOL = 1e-8
_TABLE_POINTS = 4097


def _quad(fn, a, b):
    """Adaptive quadrature that treats any convergence warning as divergence."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(fn, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
        except integrate.IntegrationWarning as exc:
            raise InfiniteMomentError(f"integral over ({a}, {b}) does not converge: {exc}") from None
    if not np.isfinite(val):
        raise InfiniteMomentError(f"integral over ({a}, {b}) diverges")
    return val


@dataclass(frozen=True)
class Atoms:
    """Levy measure ``sum_i rate_i * delta_{size_i}``."""

    sizes: tuple[float, ...] = ()
    rates: tuple[float, ...] = ()

    def __post_init__(self):
        sizes = tuple(float(z) for z in self.sizes)
        rates = tuple(float(r) for r in self.rates)
        if len(sizes) != len(rates):
            raise ContractError("atoms need one rate per jump size")
        if any(z == 0 or not np.isfinite(z) for z in sizes):
            raise ContractError("atom sizes must be finite and nonzero")
        if any(not (r > 0 and np.isfinite(r)) for r in rates):
            raise ContractError("atom rates must be positive and finite")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "Atoms":
        pairs = list(pairs)
        return cls(tuple(z for z, _ in pairs), tuple(r for _, r in pairs))

    @classmethod
    def symmetric(cls, size: float = 1.0, rate: float = 1.0) -> "Atoms":
        return cls((size, -size), (rate, rate))

    @property
    def total_mass(self) -> float:
        return float(sum(self.rates))

    def moment(self, p: float) -> float:
        return float(sum(r * abs(z) ** p for z, r in zip(self.sizes, self.rates)))

    def signed_mean(self) -> float:
        return float(sum(r * z for z, r in zip(self.sizes, self.rates)))

    def sample_sizes(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0)
        probs = np.asarray(self.rates) / self.total_mass
        return np.asarray(self.sizes)[rng.choice(len(self.sizes), size=count, p=probs)]

    def describe(self) -> dict:
        return {"atoms": [[z, r] for z, r in zip(self.sizes, self.rates)]}


@dataclass(frozen=True, eq=False)
class Density:
    """Levy measure ``nu(dz) = density(z) dz`` on a union of intervals.

    Intervals must not contain 0 in their interior.  The measure may have
    infinite total mass (an input to :func:`truncate_small_jumps`); path
    sampling requires it to be finite.  Without an explicit ``sampler`` the
    sizes are drawn by inverse transform from a tabulated CDF, which needs
    bounded intervals.
    """

    density: Callable[[float], float]
    support: tuple[tuple[float, float], ...]
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    name: str = "density"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        support = tuple((float(a), float(b)) for a, b in self.support)
        for a, b in support:
            if not a < b:
                raise ContractError(f"empty support interval ({a}, {b})")
            if a < 0 < b:
                raise ContractError("support intervals must not straddle 0")
        object.__setattr__(self, "support", support)

    def _integral(self, fn) -> float:
        return float(sum(_quad(fn, a, b) for a, b in self.support))

    @property
    def total_mass(self) -> float:
        if "mass" not in self._cache:
            self._cache["mass"] = self._integral(self.density)
        return self._cache["mass"]

    def moment(self, p: float) -> float:
        key = ("moment", float(p))
        if key not in self._cache:
            self._cache[key] = self._integral(lambda z: abs(z) ** p * self.density(z))
        return self._cache[key]

    def signed_mean(self) -> float:
        if "mean" not in self._cache:
            self._cache["mean"] = self._integral(lambda z: z * self.density(z))
        return self._cache["mean"]

    def _table(self):
        if "table" not in self._cache:
            masses = np.array([_quad(self.density, a, b) for a, b in self.support])
            grids, cdfs = [], []
            for a, b in self.support:
                if not (np.isfinite(a) and np.isfinite(b)):
                    raise ContractError("tabulated sampling needs bounded support; pass a sampler")
                z = np.linspace(a, b, _TABLE_POINTS)
                dens = np.array([self.density(v) for v in z], dtype=float)
                dens[~np.isfinite(dens)] = 0.0
                cdf = integrate.cumulative_trapezoid(dens, z, initial=0.0)
                grids.append(z)
                cdfs.append(cdf / cdf[-1])
            self._cache["table"] = (masses / masses.sum(), grids, cdfs)
        return self._cache["table"]

    def sample_sizes(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0)
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, count), dtype=float)
        weights, grids, cdfs = self._table()
        which = rng.choice(len(weights), size=count, p=weights)
        u = rng.random(count)
        out = np.empty(count)
        for i, (z, cdf) in enumerate(zip(grids, cdfs)):
            sel = which == i
            out[sel] = np.interp(u[sel], cdf, z)
        return out

    def describe(self) -> dict:
        return {"density": self.name, "support": [list(s) for s in self.support]}


LevyMeasureSpec = Union[Atoms, Density]


class _ConstantDensity:
    # module-level callables keep measures picklable for worker processes
    def __init__(self, height: float):
        self.height = height

    def __call__(self, z):
        return self.height


class _UniformSampler:
    def __init__(self, low: float, high: float):
        self.low, self.high = low, high

    def __call__(self, rng, count):
        return self.low + (self.high - self.low) * rng.random(count)


class _PowerLaw:
    def __init__(self, gamma: float):
        self.gamma = gamma

    def __call__(self, z):
        return abs(z) ** (-1.0 - self.gamma)


def uniform_density(low: float, high: float, mass: float = 1.0) -> Density:
    """Uniform Levy density of total mass ``mass`` on ``[low, high]``."""
    return Density(_ConstantDensity(mass / (high - low)), ((low, high),),
                   _UniformSampler(low, high), f"uniform[{low:g},{high:g}]x{mass:g}")


def power_law_density(gamma: float, upper: float = 1.0, symmetric: bool = False) -> Density:
    """``|z|^(-1-gamma)`` on ``(0, upper]`` (and its mirror when symmetric).

    Infinite activity for ``gamma > 0``; truncate before sampling.
    """
    if not 0 < gamma < 2:
        raise ContractError("power-law index must lie in (0, 2)")
    support = ((0.0, upper),) + (((-upper, 0.0),) if symmetric else ())
    return Density(_PowerLaw(gamma), support, None, f"power[{gamma:g}]{'sym' if symmetric else ''}")


def beta_moment(nu: LevyMeasureSpec, p: float) -> float:
    """``beta_p = int |z|^p nu(dz)``."""
    if not p >= 1:
        raise ContractError(f"moment order must be >= 1, got {p}")
    return nu.moment(p)


def mean_rate(nu: LevyMeasureSpec) -> float:
    """Compensator drift ``mu1 = int z nu(dz)``."""
    return nu.signed_mean()


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Sampled compound Poisson path on ``(0, horizon]``."""

    horizon: float
    times: np.ndarray
    sizes: np.ndarray
    mean_rate: float = 0.0

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        sizes = np.array(self.sizes, dtype=float)
        if times.shape != sizes.shape or times.ndim != 1:
            raise ContractError("times and sizes must be matching 1-d arrays")
        if times.size and (times[0] <= 0 or times[-1] > self.horizon or np.any(np.diff(times) <= 0)):
            raise ContractError("jump times must increase strictly within (0, horizon]")
        times.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)

    def __len__(self):
        return self.times.size

    def value(self, t: float) -> float:
        """Compensated value ``X_t``."""
        return increment(self, 0.0, t)

    def increments(self, nodes: np.ndarray) -> np.ndarray:
        """``X(nodes[i+1]) - X(nodes[i])`` for an increasing node array."""
        cum = np.concatenate([[0.0], np.cumsum(self.sizes)])
        jumps = cum[np.searchsorted(self.times, nodes, side="right")]
        return np.diff(jumps) - np.diff(nodes) * self.mean_rate


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for path ``index`` under master ``seed``.

    Streams depend only on ``(seed, index)``, so results do not depend on
    how paths are split across workers.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_path(nu: LevyMeasureSpec, T: float, rng) -> JumpPath:
    """Draw one path on ``(0, T]``; ``rng`` is a Generator or an integer seed."""
    if not T > 0:
        raise ContractError(f"horizon must be positive, got {T}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    mass = nu.total_mass
    if not np.isfinite(mass):
        raise InfiniteMomentError("sampling needs a finite-activity measure")
    count = int(rng.poisson(mass * T)) if mass > 0 else 0
    # 1 - U lies in (0, 1], so every time is in (0, T]
    times = np.sort(T * (1.0 - rng.random(count)))
    sizes = nu.sample_sizes(rng, count)
    return JumpPath(T, times, sizes, mean_rate(nu) if mass > 0 else 0.0)


def increment(path: JumpPath, s: float, t: float) -> float:
    """``sum_{s < tau_i <= t} z_i - (t - s) mu1``."""
    if s > t:
        raise ContractError(f"increment needs s <= t, got s={s}, t={t}")
    if s < 0 or t > path.horizon:
        raise ContractError(f"[{s}, {t}] is not inside [0, {path.horizon}]")
    lo, hi = np.searchsorted(path.times, [s, t], side="right")
    return float(path.sizes[lo:hi].sum() - (t - s) * path.mean_rate)


def step_integral(path: JumpPath, nodes: np.ndarray, values: np.ndarray) -> float:
    """``int H dX`` for the left-continuous step function ``H = values[i]`` on
    ``(nodes[i], nodes[i+1]]``.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    idx = np.searchsorted(nodes, path.times, side="left") - 1
    inside = (idx >= 0) & (idx < values.size)
    jumps = float((values[idx[inside]] * path.sizes[inside]).sum())
    return jumps - path.mean_rate * float((values * np.diff(nodes)).sum())


@dataclass(frozen=True)
class TruncationReport:
    epsilon: float
    kept_mass: float
    discarded_variance: float


def truncate_small_jumps(nu: LevyMeasureSpec, epsilon: float):
    """Drop jumps with ``|z| < epsilon``.

    Returns the finite-activity remainder and a report of the discarded
    second moment ``int_{|z| < epsilon} z^2 nu(dz)``.
    """
    if not epsilon > 0:
        raise ContractError(f"truncation level must be positive, got {epsilon}")
    if isinstance(nu, Atoms):
        keep = [(z, r) for z, r in zip(nu.sizes, nu.rates) if abs(z) >= epsilon]
        drop = sum(r * z * z for z, r in zip(nu.sizes, nu.rates) if abs(z) < epsilon)
        out = nu if len(keep) == len(nu.sizes) else Atoms.from_pairs(keep)
        return out, TruncationReport(epsilon, out.total_mass, float(drop))

    kept, small = [], []
    for a, b in nu.support:
        # pieces of (a, b) with |z| >= epsilon and |z| < epsilon
        for lo, hi in ((max(a, epsilon), b), (a, min(b, -epsilon))):
            if lo < hi:
                kept.append((lo, hi))
        lo, hi = max(a, -epsilon), min(b, epsilon)
        if lo < hi:
            small.append((lo, hi))
    discarded = sum(_quad(lambda z: z * z * nu.density(z), a, b) for a, b in small)
    out = Density(nu.density, tuple(kept), None, f"{nu.name}|>={epsilon:g}")
    mass = out.total_mass
    if not np.isfinite(mass):
        raise InfiniteMomentError("truncated measure still has infinite mass")
    return out, TruncationReport(epsilon, mass, float(discarded))

"""Periodic grids, discrete Fourier transforms and Fourier multipliers.

The whole space is modelled by the torus ``[0, L)^d`` sampled at ``n``
points per axis.  Fourier coefficients are normalised as

    f_hat(k) = n^{-d} sum_m f(x_m) exp(-2 pi i k.m / n),

which approximates ``L^{-d} int exp(-2 pi i xi_k.x) f(x) dx`` with
``xi_k = k / L``.  Coefficient arrays use numpy's FFT ordering, so
``np.fft.fftfreq`` gives the integer index ``k`` of every slot.

Operators are multipliers evaluated exactly at the lattice frequencies:

* heat semigroup        exp(-4 pi^2 |xi|^2 t)
* fractional semigroup  exp(-t (2 pi |xi|)^(2 alpha))
* Bessel potential      (1 + 4 pi^2 |xi|^2)^(s/2)
* Riesz potential       (2 pi |xi|)^s, zero mode removed
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, SingularityError

TWO_PI = 2.0 * np.pi

# Zero-mode tolerance for homogeneous (mean-zero) computations, relative to
# the largest coefficient magnitude and never below this absolute floor.
MEAN_ZERO_TOL = 1e-12


class Rep(enum.Enum):
    PHYSICAL = "physical"
    FOURIER = "fourier"


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[0, period)^dim`` with ``n`` points per axis."""

    dim: int = 1
    n: int = 256
    period: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ContractError(f"dim must be 1 or 2, got {self.dim}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or self.n & (self.n - 1):
            raise ContractError(f"n must be a power of two >= 8, got {self.n}")
        if not self.period > 0:
            raise ContractError(f"period must be positive, got {self.period}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "period", float(self.period))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def spacing(self) -> float:
        return self.period / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def volume(self) -> float:
        return self.period ** self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        """Trailing array axes that hold the spatial dimensions."""
        return tuple(range(-self.dim, 0))

    def points(self) -> np.ndarray:
        """Grid coordinates, shape ``(dim, *shape)``."""
        x = np.arange(self.n) * self.spacing
        return np.stack(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def wavenumbers(self) -> np.ndarray:
        """Integer indices ``k`` in FFT order, shape ``(dim, *shape)``."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return np.stack(np.meshgrid(*([k] * self.dim), indexing="ij"))

    def frequencies(self) -> np.ndarray:
        """Continuous frequencies ``xi_k = k / L``, shape ``(dim, *shape)``."""
        return _frequencies(self)

    def frequency_norm(self) -> np.ndarray:
        """``|xi_k|`` on the lattice, shape ``shape``."""
        return _frequency_norm(self)

    def smallest_frequency(self) -> float:
        return 1.0 / self.period

    def largest_frequency(self) -> float:
        return (self.n // 2) / self.period * np.sqrt(self.dim)

    def zero_index(self) -> tuple[int, ...]:
        return (0,) * self.dim


@functools.lru_cache(maxsize=64)
def _frequencies(grid: GridSpec) -> np.ndarray:
    xi = grid.wavenumbers() / grid.period
    xi.setflags(write=False)
    return xi


@functools.lru_cache(maxsize=64)
def _frequency_norm(grid: GridSpec) -> np.ndarray:
    r = np.sqrt((_frequencies(grid) ** 2).sum(axis=0))
    r.setflags(write=False)
    return r


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def fft_coeffs(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Normalised forward transform over the trailing spatial axes."""
    return np.fft.fftn(values, axes=grid.axes) / grid.size


def ifft_values(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`fft_coeffs` over the trailing spatial axes."""
    return np.fft.ifftn(coeffs, axes=grid.axes) * grid.size


def lp_norm_values(values: np.ndarray, grid: GridSpec, p: float) -> np.ndarray:
    """Rectangle-rule L^p norm over the trailing axes (batch aware)."""
    a = np.abs(values)
    if p == 1:
        s = a.sum(axis=grid.axes)
    elif p == 2:
        s = (a * a).sum(axis=grid.axes)
    else:
        s = (a ** p).sum(axis=grid.axes)
    return (grid.cell_volume * s) ** (1.0 / p)


def lp_norm_coeffs(coeffs: np.ndarray, grid: GridSpec, p: float) -> np.ndarray:
    """L^p norm of fields given by Fourier coefficients (batch aware).

    For ``p == 2`` the discrete Plancherel identity is used and no inverse
    transform is taken; both routes agree to rounding error.
    """
    if p == 2:
        a = np.abs(coeffs)
        return np.sqrt(grid.volume * (a * a).sum(axis=grid.axes))
    return lp_norm_values(ifft_values(coeffs, grid), grid, p)


def is_mean_zero(coeffs: np.ndarray, grid: GridSpec) -> bool:
    """True when every zero-frequency coefficient is negligible."""
    zero = coeffs[(..., *grid.zero_index())]
    scale = max(1.0, float(np.max(np.abs(coeffs), initial=0.0)))
    return bool(np.all(np.abs(zero) <= MEAN_ZERO_TOL * scale))


@dataclass(frozen=True, eq=False)
class Field:
    """Immutable complex field on a grid, stored in one representation."""

    grid: GridSpec
    values: np.ndarray
    rep: Rep = Rep.PHYSICAL

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.size != self.grid.size:
            raise ContractError(
                f"field has {v.size} values, grid needs {self.grid.size}")
        object.__setattr__(self, "values", _frozen(v.reshape(self.grid.shape)))
        object.__setattr__(self, "rep", Rep(self.rep))

    @classmethod
    def physical(cls, grid: GridSpec, values) -> "Field":
        return cls(grid, values, Rep.PHYSICAL)

    @classmethod
    def fourier(cls, grid: GridSpec, coeffs) -> "Field":
        return cls(grid, coeffs, Rep.FOURIER)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable) -> "Field":
        """Sample ``fn(*coords)`` on the grid points."""
        return cls(grid, fn(*grid.points()), Rep.PHYSICAL)

    @classmethod
    def mode(cls, grid: GridSpec, k, amplitude: complex = 1.0) -> "Field":
        """Single Fourier mode ``amplitude * exp(2 pi i k.x / L)``."""
        k = np.atleast_1d(np.asarray(k, dtype=int))
        if k.shape != (grid.dim,):
            raise ContractError(f"mode index must have {grid.dim} entries")
        if np.any(k < -grid.n // 2) or np.any(k >= grid.n // 2):
            raise ContractError(f"mode {tuple(k)} is not resolved on n={grid.n}")
        c = np.zeros(grid.shape, dtype=complex)
        c[tuple(k % grid.n)] = amplitude
        return cls(grid, c, Rep.FOURIER)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape), Rep.PHYSICAL)

    def coeffs(self) -> np.ndarray:
        """Fourier coefficients (read-only array)."""
        if self.rep is Rep.FOURIER:
            return self.values
        return _frozen(fft_coeffs(self.values, self.grid))

    def samples(self) -> np.ndarray:
        """Physical point values (read-only array)."""
        if self.rep is Rep.PHYSICAL:
            return self.values
        return _frozen(ifft_values(self.values, self.grid))

    def in_rep(self, rep: Rep) -> "Field":
        if rep is self.rep:
            return self
        if rep is Rep.FOURIER:
            return forward_transform(self)
        return inverse_transform(self)

    @property
    def zero_mode(self) -> complex:
        return complex(self.coeffs()[self.grid.zero_index()])

    def is_mean_zero(self) -> bool:
        return is_mean_zero(self.coeffs(), self.grid)

    def without_mean(self) -> "Field":
        c = np.array(self.coeffs())
        c[self.grid.zero_index()] = 0.0
        return Field(self.grid, c, Rep.FOURIER).in_rep(self.rep)

    def _combine(self, other: "Field", op) -> "Field":
        if other.grid != self.grid:
            raise ContractError("fields live on different grids")
        return Field(self.grid, op(self.values, other.in_rep(self.rep).values), self.rep)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return Field(self.grid, self.values * scalar, self.rep)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values, self.rep)

    def allclose(self, other: "Field", rtol=1e-12, atol=1e-14) -> bool:
        return bool(np.allclose(self.samples(), other.samples(), rtol=rtol, atol=atol))


def forward_transform(f: Field) -> Field:
    """Physical values to Fourier coefficients."""
    if f.rep is not Rep.PHYSICAL:
        raise ContractError("forward_transform expects a physical field")
    return Field(f.grid, fft_coeffs(f.values, f.grid), Rep.FOURIER)


def inverse_transform(f: Field) -> Field:
    """Fourier coefficients to physical values."""
    if f.rep is not Rep.FOURIER:
        raise ContractError("inverse_transform expects a Fourier field")
    return Field(f.grid, ifft_values(f.values, f.grid), Rep.PHYSICAL)


@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier.

    ``symbol`` maps a frequency array of shape ``(dim, *shape)`` to the
    symbol values of shape ``shape`` (a scalar broadcasts).
    """

    symbol: Callable[[np.ndarray], np.ndarray]
    name: str = "multiplier"

    @classmethod
    def radial(cls, profile: Callable[[np.ndarray], np.ndarray], name="radial") -> "Multiplier":
        return cls(lambda xi: profile(np.sqrt((xi ** 2).sum(axis=0))), name)

    def values(self, grid: GridSpec) -> np.ndarray:
        xi = grid.frequencies()
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.asarray(self.symbol(xi), dtype=complex)
        return np.broadcast_to(v, grid.shape)

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        a, b = self.symbol, other.symbol
        return Multiplier(lambda xi: np.asarray(a(xi)) * np.asarray(b(xi)),
                          f"{self.name}*{other.name}")


def multiply_coeffs(coeffs: np.ndarray, sym: np.ndarray, name="multiplier") -> np.ndarray:
    """Apply symbol values to coefficients, rejecting singular active modes."""
    bad = ~np.isfinite(sym)
    if np.any(bad):
        active = np.broadcast_to(np.abs(coeffs) > 0, np.broadcast_shapes(coeffs.shape, sym.shape))
        if np.any(active & bad):
            raise SingularityError(f"symbol of {name} is not finite at an active frequency")
        sym = np.where(bad, 0.0, sym)
    return coeffs * sym


def apply_multiplier(f: Field, m: Multiplier) -> Field:
    """Multiply the Fourier coefficients of ``f`` by ``m``; keep f's representation."""
    out = multiply_coeffs(f.coeffs(), m.values(f.grid), m.name)
    return Field(f.grid, out, Rep.FOURIER).in_rep(f.rep)


@dataclass(frozen=True)
class Semigroup:
    """Diffusion semigroup ``exp(-t * rate(xi))``.

    ``alpha = 1`` is the heat semigroup with rate ``4 pi^2 |xi|^2``;
    ``0 < alpha < 1`` is the fractional semigroup with rate
    ``(2 pi |xi|)^(2 alpha)``.
    """

    alpha: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ContractError(f"alpha must lie in (0, 1], got {self.alpha}")

    @classmethod
    def heat(cls) -> "Semigroup":
        return cls(1.0)

    @classmethod
    def fractional(cls, alpha: float) -> "Semigroup":
        if not (0.0 < alpha < 1.0):
            raise ContractError(f"fractional order must lie in (0, 1), got {alpha}")
        return cls(float(alpha))

    @property
    def is_heat(self) -> bool:
        return self.alpha == 1.0

    @property
    def name(self) -> str:
        return "heat" if self.is_heat else f"fractional({self.alpha:g})"

    def rate_of(self, r: np.ndarray) -> np.ndarray:
        """Decay rate as a function of ``|xi|``."""
        if self.is_heat:
            return (TWO_PI * r) ** 2
        return (TWO_PI * r) ** (2.0 * self.alpha)

    def rates(self, grid: GridSpec) -> np.ndarray:
        return self.rate_of(grid.frequency_norm())

    def multiplier(self, t: float) -> Multiplier:
        if t < 0:
            raise ContractError(f"semigroup time must be nonnegative, got {t}")
        return Multiplier.radial(lambda r: np.exp(-t * self.rate_of(r)), f"{self.name}[t={t:g}]")

    def apply(self, f: Field, t: float) -> Field:
        if t < 0:
            raise ContractError(f"semigroup time must be nonnegative, got {t}")
        if t == 0:
            return f
        out = f.coeffs() * np.exp(-t * self.rates(f.grid))
        return Field(f.grid, out, Rep.FOURIER).in_rep(f.rep)


HEAT = Semigroup.heat()


def heat_semigroup(f: Field, t: float) -> Field:
    """``T_t f`` for the heat equation ``u_t = Laplacian u``."""
    return HEAT.apply(f, t)


def fractional_semigroup(f: Field, t: float, alpha: float) -> Field:
    """``P_t f`` for ``u_t = -(-Laplacian)^alpha u`` with ``0 < alpha < 1``."""
    return Semigroup.fractional(alpha).apply(f, t)


def bessel_symbol(s: float) -> Multiplier:
    return Multiplier.radial(lambda r: (1.0 + (TWO_PI * r) ** 2) ** (s / 2.0), f"bessel[{s:g}]")


def riesz_symbol(s: float) -> Multiplier:
    """``(2 pi |xi|)^s`` with the zero mode set to zero for ``s != 0``."""
    if s == 0:
        return Multiplier(lambda xi: 1.0, "riesz[0]")

    def sym(xi):
        r = np.sqrt((xi ** 2).sum(axis=0))
        out = np.zeros_like(r)
        nz = r > 0
        out[nz] = (TWO_PI * r[nz]) ** s
        return out

    return Multiplier(sym, f"riesz[{s:g}]")


def bessel_potential(f: Field, s: float) -> Field:
    """``(I - Laplacian)^(s/2) f``."""
    if s == 0:
        return f
    return apply_multiplier(f, bessel_symbol(s))


def riesz_potential(f: Field, s: float) -> Field:
    """``(-Laplacian)^(s/2) f`` on the mean-zero subspace.

    Negative orders require a negligible zero mode.
    """
    if s == 0:
        return f
    if s < 0 and not f.is_mean_zero():
        raise SingularityError(
            f"riesz_potential of negative order {s} needs a mean-zero field "
            f"(zero mode {abs(f.zero_mode):.3e})")
    return apply_multiplier(f, riesz_symbol(s))


def lp_norm(f: Field, p: float) -> float:
    """``((L/n)^d sum_m |f(x_m)|^p)^(1/p)``."""
    if not p >= 1:
        raise ContractError(f"L^p exponent must be >= 1, got {p}")
    return float(lp_norm_values(f.samples(), f.grid, p))

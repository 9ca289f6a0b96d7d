"""Smooth dyadic partition of unity, block projections, Besov and Sobolev norms.

The radial profile ``chi`` equals 1 on ``[0, 1]`` and 0 on ``[2, inf)``.
From it

    psi_hat(xi)   = chi(|xi|)
    phi_hat_j(xi) = chi(|xi| / 2^j) - chi(|xi| / 2^(j-1)),

so ``phi_hat_j`` is supported in ``2^(j-1) <= |xi| <= 2^(j+1)`` and the sums
telescope to one.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, SingularityError
from .grid import (
    Field,
    GridSpec,
    Multiplier,
    Rep,
    TWO_PI,
    bessel_potential,
    ifft_values,
    is_mean_zero,
    lp_norm,
    lp_norm_values,
    riesz_potential,
)


# complex entries materialised at once when stacking block projections
_BLOCK_BUDGET = 1 << 22


def _h(x):
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def bump_profile(r) -> np.ndarray:
    """``chi(r) = h(2 - r) / (h(2 - r) + h(r - 1))`` with ``h(x) = exp(-1/x)``.

    Exactly 1 for ``r <= 1`` and exactly 0 for ``r >= 2``.
    """
    r = np.asarray(r, dtype=float)
    a = _h(2.0 - r)
    b = _h(r - 1.0)
    return a / (a + b)


def _floor_log2(x: float) -> int:
    # frexp is exact, so powers of two land on the right integer
    m, e = math.frexp(x)
    return e - 1


@dataclass(frozen=True)
class DyadicPartition:
    """Dyadic blocks resolved on ``grid``.

    ``j_min`` is the smallest block that is nonzero at some lattice
    frequency and ``j_max`` the largest block whose support reaches the
    lattice.  Between them the homogeneous sum is exactly one.
    """

    grid: GridSpec
    j_min: int
    j_max: int
    profile: Callable[[np.ndarray], np.ndarray] = bump_profile

    def low_symbol(self) -> np.ndarray:
        return _low_symbol(self)

    def block_symbol(self, j: int) -> np.ndarray:
        return _block_symbol(self, j)

    def block_symbols(self, js) -> np.ndarray:
        return np.stack([self.block_symbol(j) for j in js])

    def indices(self, homogeneous: bool) -> range:
        lo = self.j_min if homogeneous else max(1, self.j_min)
        return range(lo, self.j_max + 1)

    def low_multiplier(self) -> Multiplier:
        return Multiplier.radial(self.profile, "psi")

    def block_multiplier(self, j: int) -> Multiplier:
        prof = self.profile
        return Multiplier.radial(
            lambda r: prof(r / 2.0 ** j) - prof(r / 2.0 ** (j - 1)), f"phi_{j}")

    def partition_defect(self) -> tuple[float, float]:
        """Max deviation from one of the nonhomogeneous and homogeneous sums."""
        r = self.grid.frequency_norm()
        total = self.low_symbol() + sum(self.block_symbol(j) for j in self.indices(False))
        mask = r <= 2.0 ** self.j_max
        nonhom = float(np.max(np.abs(1.0 - total[mask])))
        hom_total = sum(self.block_symbol(j) for j in self.indices(True))
        mask = (r > 0) & (r >= 2.0 ** self.j_min) & (r <= 2.0 ** self.j_max)
        hom = float(np.max(np.abs(1.0 - hom_total[mask])))
        return nonhom, hom


@functools.lru_cache(maxsize=128)
def _low_symbol(part: DyadicPartition) -> np.ndarray:
    s = part.profile(part.grid.frequency_norm())
    s.setflags(write=False)
    return s


@functools.lru_cache(maxsize=1024)
def _block_symbol(part: DyadicPartition, j: int) -> np.ndarray:
    r = part.grid.frequency_norm()
    s = part.profile(r / 2.0 ** j) - part.profile(r / 2.0 ** (j - 1))
    s.setflags(write=False)
    return s


@functools.lru_cache(maxsize=64)
def build_partition(grid: GridSpec, profile: Callable = bump_profile) -> DyadicPartition:
    """Resolve the dyadic index range of ``grid``.

    Block ``j`` is nonzero at ``|xi|`` only when ``2^(j-1) < |xi| < 2^(j+1)``;
    ``j_min = floor(log2(min |xi|))`` is the smallest such block at the lowest
    nonzero frequency and ``j_max = floor(log2(max |xi|)) + 1`` the largest
    block whose closed support meets the lattice.
    """
    j_min = _floor_log2(grid.smallest_frequency())
    j_max = _floor_log2(grid.largest_frequency()) + 1
    return DyadicPartition(grid, j_min, j_max, profile)


def _partition_for(f: Field, partition: DyadicPartition | None) -> DyadicPartition:
    if partition is None:
        return build_partition(f.grid)
    if partition.grid != f.grid:
        raise ContractError("partition was built for a different grid")
    return partition


def project_block(f: Field, j: int, partition: DyadicPartition | None = None) -> Field:
    """``phi_j * f``."""
    part = _partition_for(f, partition)
    if not part.j_min <= j <= part.j_max:
        raise ContractError(f"block {j} outside resolved range [{part.j_min}, {part.j_max}]")
    out = Field(f.grid, f.coeffs() * part.block_symbol(j), Rep.FOURIER)
    return out.in_rep(f.rep)


def project_low(f: Field, partition: DyadicPartition | None = None) -> Field:
    """``psi * f``."""
    part = _partition_for(f, partition)
    out = Field(f.grid, f.coeffs() * part.low_symbol(), Rep.FOURIER)
    return out.in_rep(f.rep)


def besov_norm_coeffs(coeffs: np.ndarray, part: DyadicPartition, k: float, p: float,
                      homogeneous: bool = False) -> np.ndarray:
    """Besov ``B^k_{p,p}`` norm of fields given by coefficients (batch aware)."""
    grid = part.grid
    if homogeneous and not is_mean_zero(coeffs, grid):
        raise SingularityError("homogeneous Besov norm needs mean-zero fields")
    js = list(part.indices(homogeneous))
    batch = coeffs.shape[:-grid.dim]
    flat = coeffs.reshape((-1,) + grid.shape)
    out = np.empty(flat.shape[0])
    symbols = part.block_symbols(js) if js else None
    weights = 2.0 ** (k * np.asarray(js, dtype=float))
    chunk = max(1, _BLOCK_BUDGET // (max(len(js), 1) * grid.size))
    for start in range(0, flat.shape[0], chunk):
        c = flat[start:start + chunk]
        acc = np.zeros(c.shape[0])
        if js:
            blocks = c[None] * symbols[:, None]
            norms = lp_norm_values(ifft_values(blocks, grid), grid, p)
            acc = ((weights[:, None] * norms) ** p).sum(axis=0)
        total = acc ** (1.0 / p)
        if not homogeneous:
            total = total + lp_norm_values(ifft_values(c * part.low_symbol(), grid), grid, p)
        out[start:start + chunk] = total
    return out.reshape(batch)


def besov_norm(f: Field, k: float, p: float, homogeneous: bool = False,
               partition: DyadicPartition | None = None) -> float:
    """Nonhomogeneous or homogeneous Besov norm with equal inner and outer exponent.

    Nonhomogeneous: ``||psi*f||_p + (sum_{j>=1} (2^{kj} ||phi_j*f||_p)^p)^(1/p)``.
    Homogeneous: the block sum over the whole resolved range, no low block.
    """
    if not p >= 1:
        raise ContractError(f"L^p exponent must be >= 1, got {p}")
    part = _partition_for(f, partition)
    return float(besov_norm_coeffs(f.coeffs(), part, k, p, homogeneous))


def sobolev_weights(grid: GridSpec, k: float, homogeneous: bool) -> np.ndarray:
    r = grid.frequency_norm()
    if k == 0:
        return np.ones(grid.shape)
    if homogeneous:
        out = np.zeros(grid.shape)
        nz = r > 0
        out[nz] = (TWO_PI * r[nz]) ** k
        return out
    return (1.0 + (TWO_PI * r) ** 2) ** (k / 2.0)


def sobolev_norm(f: Field, k: float, p: float, homogeneous: bool = False) -> float:
    """``||(I - Laplacian)^(k/2) f||_p`` or ``||(-Laplacian)^(k/2) f||_p``."""
    if homogeneous:
        if not f.is_mean_zero():
            raise SingularityError("homogeneous Sobolev norm needs a mean-zero field")
        return lp_norm(riesz_potential(f, k), p)
    return lp_norm(bessel_potential(f, k), p)

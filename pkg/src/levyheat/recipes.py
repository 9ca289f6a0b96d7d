"""Named generators for the forcing field ``g``.

Every recipe is a pure function of ``(grid, tgrid, parameters)``.  Random
recipes draw their coefficients on a fixed wavenumber band that does not
depend on ``n``, so the same seed gives the same continuum field on every
resolution that resolves the band.
"""

from __future__ import annotations

import numpy as np

from .convolution import SpaceTimeField, TimeGrid
from .errors import ContractError
from .grid import Field, GridSpec

RECIPE_VERSION = 1
RECIPES = ("zero", "single_mode", "random_decay", "step_in_time")


def zero(grid: GridSpec, tgrid: TimeGrid) -> SpaceTimeField:
    return SpaceTimeField.zeros(grid, tgrid)


def single_mode(grid: GridSpec, tgrid: TimeGrid, k0=None, j0: int | None = None,
                amplitude: float = 1.0) -> SpaceTimeField:
    """Time-constant ``amplitude * exp(2 pi i k0.x / L)``.

    ``j0`` selects the mode with ``|xi| = 2^j0`` along the first axis.
    """
    if j0 is not None:
        k = 2.0 ** j0 * grid.period
        if k != round(k):
            raise ContractError(f"|xi| = 2^{j0} is not a lattice frequency for period {grid.period}")
        k0 = [int(round(k))] + [0] * (grid.dim - 1)
    if k0 is None:
        raise ContractError("single_mode needs k0 or j0")
    return SpaceTimeField.constant(Field.mode(grid, k0, amplitude), tgrid)


def random_decay_field(grid: GridSpec, slope: float = 2.0, seed: int = 0, kmax: int = 16,
                       mean_zero: bool = False) -> Field:
    """Real random field with coefficients ``~ (1 + |k|)^(-slope)`` for ``|k_i| <= kmax``."""
    if kmax >= grid.n // 2:
        raise ContractError(f"band kmax={kmax} is not resolved on n={grid.n}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(RECIPE_VERSION,)))
    band = 2 * kmax + 1
    shape = (band,) * grid.dim
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    k = np.stack(np.meshgrid(*([np.arange(-kmax, kmax + 1)] * grid.dim), indexing="ij"))
    raw *= (1.0 + np.sqrt((k ** 2).sum(axis=0))) ** (-slope)
    # Hermitian symmetrisation makes the physical field real
    raw = 0.5 * (raw + np.conj(raw[(slice(None, None, -1),) * grid.dim]))
    centre = (kmax,) * grid.dim
    if mean_zero:
        raw[centre] = 0.0
    coeffs = np.zeros(grid.shape, dtype=complex)
    idx = tuple(np.arange(-kmax, kmax + 1) % grid.n for _ in range(grid.dim))
    coeffs[np.ix_(*idx)] = raw
    return Field.fourier(grid, coeffs)


def random_decay(grid: GridSpec, tgrid: TimeGrid, slope: float = 2.0, seed: int = 0,
                 kmax: int = 16, mean_zero: bool = False) -> SpaceTimeField:
    """Time-constant smooth random field."""
    return SpaceTimeField.constant(random_decay_field(grid, slope, seed, kmax, mean_zero), tgrid)


def step_in_time(grid: GridSpec, tgrid: TimeGrid, slope: float = 2.0, seed: int = 0,
                 kmax: int = 16, mean_zero: bool = False, segments: int = 4) -> SpaceTimeField:
    """Random spatial profile switched by a piecewise-constant random amplitude.

    The time axis is cut into ``segments`` equal pieces (aligned to nodes)
    with amplitudes uniform on ``[0, 1]``.
    """
    base = random_decay_field(grid, slope, seed, kmax, mean_zero)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(RECIPE_VERSION, 1)))
    amps = rng.random(segments)
    which = np.minimum((np.arange(tgrid.steps + 1) * segments) // tgrid.steps, segments - 1)
    frames = amps[which][:, None] * base.samples().reshape(1, -1)
    return SpaceTimeField(grid, tgrid, frames)


def make_field(name: str, grid: GridSpec, tgrid: TimeGrid, **params) -> SpaceTimeField:
    """Dispatch a recipe by name."""
    if name not in RECIPES:
        raise ContractError(f"unknown field recipe {name!r}; known: {', '.join(RECIPES)}")
    return globals()[name](grid, tgrid, **params)

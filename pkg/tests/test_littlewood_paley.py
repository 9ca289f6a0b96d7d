import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import grid_specs, random_field
from levyheat.errors import ContractError, SingularityError
from levyheat.grid import Field, GridSpec, bessel_potential, lp_norm, riesz_potential
from levyheat.littlewood_paley import (
    besov_norm,
    bump_profile,
    build_partition,
    project_block,
    project_low,
    sobolev_norm,
)


def test_profile_boundary_values():
    assert bump_profile(1.0) == 1.0
    assert bump_profile(2.0) == 0.0
    r = np.linspace(0, 3, 301)
    chi = bump_profile(r)
    assert np.all(chi[r <= 1] == 1) and np.all(chi[r >= 2] == 0)
    assert np.all(np.diff(chi) <= 0)


@pytest.mark.parametrize("grid, expected", [
    (GridSpec(1, 256, 1.0), (0, 8)),
    (GridSpec(1, 4096, 32.0), (-5, 7)),
    (GridSpec(2, 64, 1.0), (0, 6)),
    (GridSpec(1, 8, 1.0), (0, 3)),
])
def test_resolved_range(grid, expected):
    part = build_partition(grid)
    assert (part.j_min, part.j_max) == expected


def test_range_matches_support_conditions():
    # oracle: j_min is the first block that is nonzero somewhere on the
    # lattice, j_max the last block whose closed support meets it
    for grid in (GridSpec(1, 256), GridSpec(1, 64, 3.0), GridSpec(2, 32, 0.5)):
        part = build_partition(grid)
        r = grid.frequency_norm()
        nonzero = [j for j in range(-20, 20) if np.any((r > 2.0 ** (j - 1)) & (r < 2.0 ** (j + 1)))]
        touching = [j for j in range(-20, 20)
                    if np.any((r > 0) & (r >= 2.0 ** (j - 1)) & (r <= 2.0 ** (j + 1)))]
        assert (part.j_min, part.j_max) == (min(nonzero), max(touching))


@given(grid_specs)
def test_partition_of_unity(grid):
    nonhom, hom = build_partition(grid).partition_defect()
    assert nonhom <= 1e-12 and hom <= 1e-12


def test_block_support():
    g = GridSpec(1, 256)
    part = build_partition(g)
    r = g.frequency_norm()
    for j in range(part.j_min, part.j_max + 1):
        s = part.block_symbol(j)
        assert np.all(s[(r < 2.0 ** (j - 1)) | (r > 2.0 ** (j + 1))] == 0)


@pytest.mark.parametrize("j0", [1, 2, 3, 5])
def test_project_block_single_mode(j0):
    g = GridSpec(1, 128)
    f = Field.mode(g, [2 ** j0])
    assert project_block(f, j0).allclose(f)
    for j in (j0 - 1, j0 + 1):
        assert np.max(np.abs(project_block(f, j).coeffs())) == 0


def test_project_block_low_spectrum_vanishes():
    g = GridSpec(1, 128)
    f = Field.mode(g, [3]) + Field.mode(g, [-2])
    assert np.max(np.abs(project_block(f, 4).coeffs())) == 0


def test_project_block_out_of_range():
    g = GridSpec(1, 64)
    with pytest.raises(ContractError):
        project_block(Field.mode(g, [1]), 9)


@given(grid_specs, st.integers(0, 10 ** 6))
def test_blocks_reassemble(grid, seed):
    f = random_field(grid, seed)
    part = build_partition(grid)
    total = project_low(f)
    for j in part.indices(False):
        total = total + project_block(f, j)
    assert np.max(np.abs(total.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))


def test_project_low_examples():
    g = GridSpec(1, 32)
    const = Field.physical(g, np.ones(32))
    assert project_low(const).allclose(const)
    assert np.max(np.abs(project_low(Field.mode(g, [2])).coeffs())) == 0
    assert project_low(Field.mode(g, [1])).allclose(Field.mode(g, [1]))


def test_besov_examples():
    g = GridSpec(1, 256)
    assert besov_norm(Field.zeros(g), 1.0, 2.0) == 0
    for j0, k, p in [(1, 1.0, 2.0), (3, 1.5, 3.0), (5, -0.5, 1.0), (6, -2 / 3, 3.0)]:
        f = Field.mode(g, [2 ** j0])
        assert abs(besov_norm(f, k, p) - 2.0 ** (k * j0)) <= 1e-12 * 2.0 ** (k * j0)
    with pytest.raises(SingularityError):
        besov_norm(Field.physical(g, np.ones(256)), 0.0, 2.0, homogeneous=True)


def test_besov_l2_equivalence_interval():
    g = GridSpec(1, 256)
    ratios = [besov_norm(f, 0.0, 2.0, True) / lp_norm(f, 2)
              for f in (random_field(g, s, mean_zero=True) for s in range(50))]
    assert 1 / np.sqrt(2) - 0.01 <= min(ratios) and max(ratios) <= 1.01


def test_sobolev_examples():
    g = GridSpec(1, 64, 2.0)
    f = random_field(g, 3)
    assert abs(sobolev_norm(f, 0.0, 3.0) - lp_norm(f, 3.0)) <= 1e-14 * lp_norm(f, 3.0)
    for p in (1.0, 2.0, 5.0):
        m = Field.mode(g, [7])
        # unimodular values on a torus of volume 2
        expected = (1 + 4 * np.pi ** 2 * 3.5 ** 2) ** 0.75 * 2.0 ** (1 / p)
        assert abs(sobolev_norm(m, 1.5, p) - expected) <= 1e-12 * expected
    lhs = sobolev_norm(f, 1.2, 2.0) ** 2
    rhs = g.volume * np.sum((1 + 4 * np.pi ** 2 * g.frequency_norm() ** 2) ** 1.2
                            * np.abs(f.coeffs()) ** 2)
    assert abs(lhs - rhs) <= 1e-10 * rhs
    with pytest.raises(SingularityError):
        sobolev_norm(f, -1.0, 2.0, homogeneous=True)


@pytest.mark.parametrize("homogeneous", [False, True])
def test_besov_sobolev_equivalence_at_p2(homogeneous):
    g = GridSpec(1, 128)
    fields = [random_field(g, s, mean_zero=homogeneous) for s in range(100)]
    ratios = [besov_norm(f, 0.0, 2.0, homogeneous) / sobolev_norm(f, 0.0, 2.0, homogeneous)
              for f in fields]
    assert 0.3 <= min(ratios) and max(ratios) <= 3.0


@pytest.mark.parametrize("homogeneous", [False, True])
@pytest.mark.parametrize("k", [-1.0, -0.5, 0.5, 1.0])
def test_besov_sobolev_equivalence_at_p2_nonzero_order(homogeneous, k):
    # the dyadic weight 2^(kj) is measured in |xi| while the Sobolev symbol
    # uses 2 pi |xi|, so the raw ratio carries a factor (2 pi)^(-k)
    g = GridSpec(1, 128)
    fields = [random_field(g, s, mean_zero=homogeneous) for s in range(100)]
    ratios = np.array([besov_norm(f, k, 2.0, homogeneous) / sobolev_norm(f, k, 2.0, homogeneous)
                       for f in fields]) * (2 * np.pi) ** k
    assert 0.25 <= ratios.min() and ratios.max() <= 3.0


@given(st.integers(0, 10 ** 6), st.floats(-2, 2), st.floats(-2, 2),
       st.sampled_from([1.0, 2.0, 3.5]))
def test_bessel_isomorphism_sobolev(seed, k, s, p):
    g = GridSpec(1, 64)
    f = random_field(g, seed)
    a = sobolev_norm(bessel_potential(f, s), k - s, p)
    b = sobolev_norm(f, k, p)
    assert abs(a - b) <= 1e-10 * b


@given(st.integers(0, 10 ** 6), st.floats(-2, 2), st.floats(-2, 2),
       st.sampled_from([1.0, 2.0, 3.5]))
def test_riesz_isomorphism_homogeneous_sobolev(seed, k, s, p):
    g = GridSpec(1, 64)
    f = random_field(g, seed, mean_zero=True)
    a = sobolev_norm(riesz_potential(f, s), k - s, p, homogeneous=True)
    b = sobolev_norm(f, k, p, homogeneous=True)
    assert abs(a - b) <= 1e-10 * b


@pytest.mark.parametrize("homogeneous", [False, True])
def test_besov_isomorphism_is_an_equivalence(homogeneous):
    # on block j the lifting symbol is comparable to 2^(js), not equal to it,
    # so Besov norms are preserved up to constants depending only on s
    g = GridSpec(1, 128)
    s = 1.0
    lift = riesz_potential if homogeneous else bessel_potential
    ratios = []
    for seed in range(30):
        f = random_field(g, seed, mean_zero=homogeneous)
        ratios.append(besov_norm(lift(f, s), 0.5 - s, 2.0, homogeneous)
                      / besov_norm(f, 0.5, 2.0, homogeneous))
    # |xi| in [2^(j-1), 2^(j+1)] gives (2 pi |xi| / 2^j) in [pi, 4 pi]; the
    # inhomogeneous symbol adds the low block
    assert np.pi / 2 <= min(ratios) and max(ratios) <= 4 * np.pi * 1.01
    assert max(ratios) / min(ratios) < 4


@pytest.mark.parametrize("j0", [1, 3, 6])
def test_besov_monotone_in_k_on_modes(j0):
    f = Field.mode(GridSpec(1, 256), [2 ** j0])
    ks = np.linspace(-2, 2, 9)
    vals = [besov_norm(f, k, 2.5) for k in ks]
    assert np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(vals, 2.0 ** (ks * j0), rtol=1e-12)


def test_two_dimensional_single_mode():
    g = GridSpec(2, 64)
    f = Field.mode(g, [0, 8])
    assert abs(besov_norm(f, 1.0, 3.0) - 8.0) <= 1e-12
    assert abs(besov_norm(f, 1.0, 3.0, homogeneous=True) - 8.0) <= 1e-12

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levyheat.errors import ContractError, InfiniteMomentError
from levyheat.levy import (
    Atoms,
    Density,
    JumpPath,
    beta_moment,
    increment,
    mean_rate,
    path_rng,
    power_law_density,
    sample_path,
    step_integral,
    truncate_small_jumps,
    uniform_density,
)


# ---------------------------------------------------------------- measures

def test_atom_validation():
    with pytest.raises(ContractError):
        Atoms((0.0,), (1.0,))
    with pytest.raises(ContractError):
        Atoms((1.0,), (-1.0,))
    with pytest.raises(ContractError):
        Atoms((1.0, 2.0), (1.0,))


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 4.5])
def test_symmetric_unit_atoms(p):
    assert beta_moment(Atoms.symmetric(), p) == 2.0


@pytest.mark.parametrize("a, lam", [(0.5, 3.0), (-2.0, 0.25), (1.7, 1.0)])
def test_single_atom_second_moment(a, lam):
    nu = Atoms.from_pairs([(a, lam)])
    assert abs(beta_moment(nu, 2) - lam * a * a) <= 1e-15 * lam * a * a
    assert mean_rate(nu) == pytest.approx(lam * a, rel=1e-15)


def test_uniform_density_moments():
    nu = uniform_density(1.0, 2.0, 1.0)
    assert abs(beta_moment(nu, 2) - 7 / 3) <= 1e-8 * 7 / 3
    assert abs(nu.total_mass - 1.0) <= 1e-12
    assert abs(mean_rate(nu) - 1.5) <= 1e-12


def test_moment_order_below_one_rejected():
    with pytest.raises(ContractError):
        beta_moment(Atoms.symmetric(), 0.5)


def test_divergent_moment():
    # |z|^(-1-gamma) near 0 has infinite mass and infinite first moment for gamma >= 1
    nu = power_law_density(1.5, 1.0)
    with pytest.raises(InfiniteMomentError):
        beta_moment(nu, 1.0)
    heavy = Density(lambda z: z ** -2.5, ((1.0, np.inf),))
    with pytest.raises(InfiniteMomentError):
        beta_moment(heavy, 2.0)


def test_tabulated_sampler_matches_density():
    # triangular density 2z on (0, 1): mean 2/3
    nu = Density(lambda z: 2.0 * z, ((0.0, 1.0),))
    z = nu.sample_sizes(np.random.default_rng(0), 200_000)
    assert z.min() >= 0 and z.max() <= 1
    assert abs(z.mean() - 2 / 3) < 4 * math.sqrt(1 / 18 / z.size)


# ---------------------------------------------------------------- truncation

def test_truncation_of_finite_measure_is_identity():
    nu = Atoms.from_pairs([(0.5, 1.0), (-2.0, 3.0)])
    out, rep = truncate_small_jumps(nu, 0.1)
    assert out is nu
    assert rep.discarded_variance == 0.0


@pytest.mark.parametrize("gamma", [0.3, 0.8, 1.5])
def test_power_law_truncation_closed_forms(gamma):
    eps = 0.1
    out, rep = truncate_small_jumps(power_law_density(gamma, 1.0), eps)
    mass = (eps ** -gamma - 1) / gamma
    var = eps ** (2 - gamma) / (2 - gamma)
    assert abs(out.total_mass - mass) <= 1e-8 * mass
    assert abs(rep.kept_mass - mass) <= 1e-8 * mass
    assert abs(rep.discarded_variance - var) <= 1e-8 * var


def test_truncation_symmetric_and_errors():
    out, rep = truncate_small_jumps(power_law_density(0.5, 1.0, symmetric=True), 0.1)
    assert abs(out.total_mass - 2 * (0.1 ** -0.5 - 1) / 0.5) <= 1e-7
    assert abs(mean_rate(out)) <= 1e-8
    with pytest.raises(ContractError):
        truncate_small_jumps(Atoms.symmetric(), 0.0)


# ---------------------------------------------------------------- paths

def test_empty_measure_gives_empty_path():
    path = sample_path(Atoms(), 1.0, 0)
    assert len(path) == 0
    assert path.value(0.7) == 0.0


def test_path_invariants():
    nu = Atoms.from_pairs([(1.0, 3.0), (-0.5, 4.0)])
    for i in range(50):
        path = sample_path(nu, 2.0, path_rng(7, i))
        if len(path):
            assert path.times[0] > 0 and path.times[-1] <= 2.0
            assert np.all(np.diff(path.times) > 0)
        assert path.mean_rate == pytest.approx(1.0)


def test_jump_path_validation():
    with pytest.raises(ContractError):
        JumpPath(1.0, [0.5, 0.2], [1.0, 1.0])
    with pytest.raises(ContractError):
        JumpPath(1.0, [0.0], [1.0])
    with pytest.raises(ContractError):
        JumpPath(1.0, [1.5], [1.0])


def test_poisson_count_mean():
    nu = Atoms.from_pairs([(1.0, 5.0)])
    counts = np.array([len(sample_path(nu, 1.0, path_rng(11, i))) for i in range(10_000)])
    assert abs(counts.mean() - 5.0) <= 4 * math.sqrt(5.0 / counts.size)


def test_symmetric_martingale_mean():
    nu = Atoms.symmetric()
    xs = np.array([sample_path(nu, 1.0, path_rng(3, i)).value(1.0) for i in range(10_000)])
    assert abs(xs.mean()) <= 4 * xs.std(ddof=1) / math.sqrt(xs.size)


@pytest.mark.parametrize("nu", [Atoms.from_pairs([(1.0, 2.0)]), uniform_density(0.5, 1.5, 2.0),
                                Atoms.from_pairs([(2.0, 0.5), (-0.3, 1.0)])])
def test_compensated_step_integral_is_centred_and_isometric(nu):
    nodes = np.linspace(0, 1, 11)
    H = np.sin(np.arange(10)) + 1.5
    vals = np.array([step_integral(sample_path(nu, 1.0, path_rng(5, i)), nodes, H)
                     for i in range(10_000)])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean()) <= 4 * se
    sq = vals ** 2
    target = beta_moment(nu, 2) * float(np.sum(H ** 2 * np.diff(nodes)))
    assert abs(sq.mean() - target) <= 4 * sq.std(ddof=1) / math.sqrt(sq.size)


def test_seed_determinism():
    nu = uniform_density(0.5, 1.5, 3.0)
    a = sample_path(nu, 1.0, path_rng(42, 9))
    b = sample_path(nu, 1.0, path_rng(42, 9))
    assert a.times.tobytes() == b.times.tobytes()
    assert a.sizes.tobytes() == b.sizes.tobytes()
    c = sample_path(nu, 1.0, path_rng(42, 10))
    assert a.times.tobytes() != c.times.tobytes()


# ---------------------------------------------------------------- increments

def test_increment_examples():
    path = JumpPath(1.0, [0.5], [2.0], 0.0)
    assert increment(path, 0.3, 0.3) == 0.0
    assert increment(path, 0.0, 1.0) == 2.0
    assert increment(path, 0.5, 1.0) == 0.0
    assert increment(path, 0.0, 0.5) == 2.0
    with pytest.raises(ContractError):
        increment(path, 0.6, 0.4)


def test_increment_compensated():
    path = JumpPath(2.0, [0.5, 1.5], [1.0, 1.0], 1.0)
    assert increment(path, 0.0, 2.0) == pytest.approx(0.0)
    assert increment(path, 0.0, 1.0) == pytest.approx(0.0)
    assert increment(path, 0.4, 0.6) == pytest.approx(0.8)


@given(st.integers(0, 10 ** 6), st.floats(0, 1), st.floats(0, 1))
def test_increment_additivity(seed, a, b):
    s, t = sorted((a, b))
    path = sample_path(Atoms.symmetric(rate=5.0), 1.0, seed)
    # integer jump sizes and zero drift make the bookkeeping exact
    assert increment(path, 0, t) == increment(path, 0, s) + increment(path, s, t)


@given(st.integers(0, 10 ** 6), st.floats(0, 1), st.floats(0, 1))
def test_increment_additivity_with_drift(seed, a, b):
    s, t = sorted((a, b))
    path = sample_path(uniform_density(0.2, 1.0, 4.0), 1.0, seed)
    assert increment(path, 0, t) == pytest.approx(
        increment(path, 0, s) + increment(path, s, t), abs=1e-12)


def test_increments_match_pointwise():
    path = sample_path(uniform_density(0.2, 1.0, 6.0), 1.0, 3)
    nodes = np.linspace(0, 1, 17)
    dX = path.increments(nodes)
    expected = [increment(path, a, b) for a, b in zip(nodes[:-1], nodes[1:])]
    np.testing.assert_allclose(dX, expected, atol=1e-13)

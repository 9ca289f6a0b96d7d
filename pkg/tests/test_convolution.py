import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levyheat.convolution import (
    EULER_GRID,
    EXACT_JUMP,
    FrameNorm,
    SpaceTimeField,
    TimeGrid,
    evolve,
    isometry_value,
    mc_norm,
    mc_solution_norm,
    prop1_lhs,
    quadratic_variation_term,
    stochastic_convolution,
)
from levyheat.errors import ContractError, SingularityError
from levyheat.grid import HEAT, GridSpec, Semigroup, heat_semigroup, lp_norm
from levyheat.levy import Atoms, JumpPath, sample_path, uniform_density
from levyheat.recipes import random_decay, single_mode, step_in_time, zero

G16 = GridSpec(1, 16)


def brute_prop1(g, p, kind=HEAT):
    M, dt = g.tgrid.steps, g.tgrid.dt
    total = 0.0
    for n in range(M):
        for m in range(n):
            total += dt * dt * lp_norm(evolve(g, n, m, kind), p) ** p
    return total


# ---------------------------------------------------------------- time grid and fields

def test_time_grid():
    tg = TimeGrid(2.0, 8)
    assert tg.dt == 0.25
    np.testing.assert_allclose(tg.nodes, np.arange(9) * 0.25)
    with pytest.raises(ContractError):
        TimeGrid(1.0, 0)
    with pytest.raises(ContractError):
        TimeGrid(0.0, 4)


def test_space_time_field_shapes():
    tg = TimeGrid(1.0, 4)
    g = random_decay(G16, tg, kmax=4)
    assert len(g.frames()) == 5
    assert g.coeffs().shape == (5, 16)
    assert g.is_time_constant()
    assert not step_in_time(G16, tg, kmax=4).is_time_constant()


# ---------------------------------------------------------------- evolve

def test_evolve_examples():
    tg = TimeGrid(1.0, 10)
    g = single_mode(G16, tg, k0=[2])
    assert evolve(g, 3, 3).allclose(g.frame(3))
    out = evolve(g, 7, 2)
    assert abs(out.coeffs()[2] - math.exp(-4 * math.pi ** 2 * 4 * 0.5)) <= 1e-12
    with pytest.raises(ContractError):
        evolve(g, 2, 3)


def test_evolve_two_steps():
    tg = TimeGrid(0.1, 10)
    g = step_in_time(G16, tg, kmax=4)
    one = evolve(g, 9, 2)
    mid = SpaceTimeField.constant(evolve(g, 5, 2), tg)
    two = evolve(mid, 9, 5)
    assert np.max(np.abs(one.coeffs() - two.coeffs())) <= 1e-12 * np.max(np.abs(one.coeffs()))


# ---------------------------------------------------------------- prop1_lhs

def test_prop1_zero():
    assert prop1_lhs(zero(G16, TimeGrid(1.0, 16)), 3.0) == 0.0


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("recipe", ["single", "constant", "step"])
def test_prop1_matches_brute_force(p, recipe):
    tg = TimeGrid(0.05, 12)
    g = {"single": single_mode(G16, tg, k0=[3]),
         "constant": random_decay(G16, tg, kmax=5, seed=2),
         "step": step_in_time(G16, tg, kmax=5, seed=2)}[recipe]
    ref = brute_prop1(g, p)
    assert abs(prop1_lhs(g, p) - ref) <= 1e-12 * ref


@pytest.mark.parametrize("k0, L, M", [(1, 1.0, 64), (3, 2.0, 500), (5, 1.0, 2000)])
def test_prop1_single_mode_closed_form(k0, L, M):
    g1 = GridSpec(1, 32, L)
    tg = TimeGrid(0.3, M)
    lam = 4 * math.pi ** 2 * (k0 / L) ** 2
    q = math.exp(-2 * lam * tg.dt)
    closed = tg.dt ** 2 * L * q * (M * (1 - q) - 1 + q ** M) / (1 - q) ** 2
    assert abs(prop1_lhs(single_mode(g1, tg, k0=[k0]), 2.0) - closed) <= 1e-10 * closed


def test_prop1_time_refinement():
    g1 = GridSpec(1, 32)
    vals = [prop1_lhs(random_decay(g1, TimeGrid(0.5, M), kmax=4, seed=1), 3.0)
            for M in (2000, 4000)]
    assert abs(vals[1] - vals[0]) <= 0.05 * vals[1]


def test_quadratic_variation_equals_prop1_at_p2():
    tg = TimeGrid(0.1, 24)
    g = step_in_time(G16, tg, kmax=5, seed=4)
    a, b = prop1_lhs(g, 2.0), quadratic_variation_term(g, 2.0)
    assert abs(a - b) <= 1e-12 * a


# ---------------------------------------------------------------- stochastic convolution

@pytest.mark.parametrize("scheme", [EXACT_JUMP, EULER_GRID])
def test_no_jumps_gives_zero(scheme):
    tg = TimeGrid(1.0, 16)
    u = stochastic_convolution(random_decay(G16, tg, kmax=4), JumpPath(1.0, [], [], 0.0), scheme)
    assert np.all(u.coeffs() == 0)


def test_single_jump_exact():
    tg = TimeGrid(1.0, 10)
    g = step_in_time(G16, tg, kmax=4, seed=1)
    tau, z = 0.43, -1.5
    u = stochastic_convolution(g, JumpPath(1.0, [tau], [z], 0.0), EXACT_JUMP)
    for n in range(11):
        t = n * 0.1
        if t < tau:
            assert np.all(u.coeffs()[n] == 0)
        else:
            ref = z * heat_semigroup(g.frame(4), t - tau).coeffs()
            np.testing.assert_allclose(u.coeffs()[n], ref, atol=1e-14)


def test_horizon_mismatch():
    tg = TimeGrid(1.0, 4)
    with pytest.raises(ContractError):
        stochastic_convolution(zero(G16, tg), JumpPath(2.0, [], [], 0.0))


@pytest.mark.parametrize("M", [64, 128, 256, 512])
def test_exact_and_euler_agree_to_first_order(M):
    # per jump the schemes differ by z (exp(-lam (t - tau)) - exp(-lam (t - t_m))) g_hat,
    # at most |z| lam dt |g_hat|; per cell the compensators differ by at most
    # mu1 dt (1 + lam dt) |g_hat| summed over cells
    nu = uniform_density(0.5, 1.5, 4.0)
    path = sample_path(nu, 1.0, 17)
    tg = TimeGrid(1.0, M)
    g = random_decay(G16, tg, kmax=2, seed=3)
    a = stochastic_convolution(g, path, EXACT_JUMP).coeffs()
    b = stochastic_convolution(g, path, EULER_GRID).coeffs()
    sup = np.max(np.abs(np.fft.ifft(a - b, axis=-1) * 16))
    lam = HEAT.rates(G16)
    gh = np.abs(g.coeffs()[0])
    bound = (np.abs(path.sizes).sum() * np.sum(lam * gh)
             + abs(path.mean_rate) * np.sum((1 + lam * tg.dt) * gh))
    C = sup / tg.dt
    assert 0 < C <= bound


@given(st.integers(0, 10 ** 6))
def test_linearity(seed):
    tg = TimeGrid(1.0, 16)
    path = sample_path(Atoms.symmetric(rate=3.0), 1.0, seed)
    g1 = random_decay(G16, tg, kmax=4, seed=1)
    g2 = step_in_time(G16, tg, kmax=4, seed=2)
    u = stochastic_convolution(g1 + g2 * 2.0, path).coeffs()
    ref = stochastic_convolution(g1, path).coeffs() + 2.0 * stochastic_convolution(g2, path).coeffs()
    assert np.max(np.abs(u - ref)) <= 1e-12 * max(np.max(np.abs(ref)), 1.0)
    doubled = JumpPath(1.0, path.times, 2.0 * path.sizes, 0.0)
    # exact apart from subnormal underflow of far-decayed modes
    np.testing.assert_allclose(stochastic_convolution(g1, doubled).coeffs(),
                               2.0 * stochastic_convolution(g1, path).coeffs(), rtol=0, atol=1e-300)


@pytest.mark.parametrize("scheme", [EXACT_JUMP, EULER_GRID])
def test_causality(scheme):
    tg = TimeGrid(1.0, 20)
    path = sample_path(uniform_density(0.5, 1.5, 5.0), 1.0, 8)
    g = step_in_time(G16, tg, kmax=4, seed=5)
    frames = np.array(g.values)
    frames[12:] = np.random.default_rng(0).standard_normal(frames[12:].shape)
    h = SpaceTimeField(G16, tg, frames)
    a = stochastic_convolution(g, path, scheme).coeffs()
    b = stochastic_convolution(h, path, scheme).coeffs()
    np.testing.assert_array_equal(a[:13], b[:13])


def test_semigroup_consistency_single_early_jump():
    tg = TimeGrid(0.5, 50)
    g = random_decay(G16, tg, kmax=6, seed=9)
    z = 0.7
    u = stochastic_convolution(g, JumpPath(0.5, [1e-12], [z], 0.0))
    norms = [lp_norm(f, 2) for f in u.frames()[1:]]
    assert np.all(np.diff(norms) <= 0)
    for n in (1, 10, 50):
        ref = z * heat_semigroup(g.frame(0), tg.nodes[n] - 1e-12).coeffs()
        np.testing.assert_allclose(u.coeffs()[n], ref, atol=1e-14)


# ---------------------------------------------------------------- Monte Carlo

def test_mc_zero_field():
    est = mc_solution_norm(zero(G16, TimeGrid(1.0, 8)), Atoms.symmetric(), 0.0, 2.0, samples=10)
    assert est.mean == 0 and est.stderr == 0


def test_mc_needs_two_samples():
    with pytest.raises(ContractError):
        mc_solution_norm(zero(G16, TimeGrid(1.0, 8)), Atoms.symmetric(), samples=1)


def test_mc_homogeneous_needs_mean_zero():
    g = random_decay(G16, TimeGrid(1.0, 8), kmax=4)
    with pytest.raises(SingularityError):
        mc_solution_norm(g, Atoms.symmetric(), 0.0, 2.0, homogeneous=True, samples=4)


@pytest.mark.parametrize("nu", [Atoms.symmetric(), Atoms.from_pairs([(1.0, 1.0)]),
                                uniform_density(0.5, 1.5, 2.0)])
def test_euler_isometry_any_step(nu):
    # the Euler scheme is the exact stochastic counterpart of the quadrature
    tg = TimeGrid(1.0, 32)
    g = step_in_time(G16, tg, kmax=3, seed=1)
    est = mc_norm(g, nu, FrameNorm("sobolev", 0.0, 2.0), 4000, 5, scheme=EULER_GRID)
    assert est.within(isometry_value(g, nu), 4.0)


def test_exact_jump_isometry_on_fine_grid():
    tg = TimeGrid(1.0, 4096)
    g = single_mode(G16, tg, k0=[1])
    est = mc_solution_norm(g, Atoms.symmetric(), 0.0, 2.0, samples=3000, seed=2)
    assert est.within(isometry_value(g, Atoms.symmetric()), 4.0)


def test_stderr_scaling():
    tg = TimeGrid(1.0, 32)
    g = random_decay(G16, tg, kmax=3)
    a = mc_solution_norm(g, Atoms.symmetric(), 0.0, 2.0, samples=2000, seed=1)
    b = mc_solution_norm(g, Atoms.symmetric(), 0.0, 2.0, samples=4000, seed=1)
    assert abs(b.stderr / a.stderr - 1 / math.sqrt(2)) <= 0.2 / math.sqrt(2)


def test_workers_do_not_change_results():
    tg = TimeGrid(1.0, 16)
    g = random_decay(G16, tg, kmax=3)
    a = mc_solution_norm(g, uniform_density(0.5, 1.5), 1.0, 3.0, samples=40, seed=3)
    b = mc_solution_norm(g, uniform_density(0.5, 1.5), 1.0, 3.0, samples=40, seed=3, workers=3)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.mean == b.mean and a.stderr == b.stderr


def test_random_g_hook():
    tg = TimeGrid(1.0, 16)

    def g_of(rng):
        return random_decay(G16, tg, kmax=3, seed=int(rng.integers(1000)))

    a = mc_solution_norm(g_of, Atoms.symmetric(), samples=20, seed=1)
    b = mc_solution_norm(g_of, Atoms.symmetric(), samples=20, seed=1)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.mean > 0


def test_fractional_kind_runs():
    tg = TimeGrid(1.0, 16)
    g = random_decay(G16, tg, kmax=3)
    kind = Semigroup.fractional(0.5)
    est = mc_norm(g, Atoms.symmetric(), FrameNorm("sobolev", 0.0, 2.0), 3000, 1, kind,
                  scheme=EULER_GRID)
    assert est.within(isometry_value(g, Atoms.symmetric(), kind), 4.0)

"""Numerical verification of the kernel, Hardy-type and a-priori estimates.

None of the estimates comes with explicit constants, so every checker
reports fitted constants and a stability measure instead of comparing
against a fixed threshold.  Zero inputs give a vacuous pass with ratio 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .convolution import (
    EULER_GRID,
    FrameNorm,
    SpaceTimeField,
    frame_norm_integral,
    isometry_value,
    mc_norm,
    prop1_lhs,
    quadratic_variation_term,
)
from .errors import ContractError
from .grid import HEAT, Field, GridSpec, Semigroup, bessel_symbol, ifft_values, lp_norm_values
from .levy import LevyMeasureSpec, beta_moment
from .littlewood_paley import besov_norm, build_partition, sobolev_norm
from .recipes import random_decay_field


@dataclass
class RatioReport:
    name: str
    lhs: float
    rhs: float
    ratio: float
    verdict: bool
    criterion: str
    fitted_constants: dict = field(default_factory=dict)
    stderr: float | None = None
    refinement: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return _plain(asdict(self))

    def summary(self) -> str:
        se = f" +- {self.stderr:.3g}" if self.stderr is not None else ""
        mark = "PASS" if self.verdict else "FAIL"
        return f"{mark} {self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} ratio={self.ratio:.6g}{se}"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def safe_ratio(lhs: float, rhs: float) -> float:
    """``lhs / rhs`` with the vacuous ``0 / 0 = 0``."""
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


def fit_exponential(x, y) -> tuple[float, float, float]:
    """Least-squares fit ``log y = log C - c x``; returns ``(C, c, R^2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    x, ly = x[keep], np.log(y[keep])
    if x.size < 2 or np.ptp(x) == 0:
        raise ContractError("exponential fit needs two distinct abscissae with positive values")
    slope, intercept = np.polyfit(x, ly, 1)
    resid = ly - (intercept + slope * x)
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return float(np.exp(intercept)), float(-slope), r2


def spread(values: np.ndarray, axis=0) -> np.ndarray:
    """Relative spread ``(max - min) / mean`` along ``axis``."""
    return (values.max(axis=axis) - values.min(axis=axis)) / values.mean(axis=axis)


# --------------------------------------------------------------------------- partition

def check_partition(grid: GridSpec, tol: float = 1e-12) -> RatioReport:
    part = build_partition(grid)
    nonhom, hom = part.partition_defect()
    worst = max(nonhom, hom)
    return RatioReport(
        "partition", worst, tol, worst / tol, worst <= tol,
        f"max |1 - sum| <= {tol:g} (nonhomogeneous and homogeneous)",
        {"nonhomogeneous_defect": nonhom, "homogeneous_defect": hom,
         "j_min": part.j_min, "j_max": part.j_max},
        params={"dim": grid.dim, "n": grid.n, "period": grid.period})


# --------------------------------------------------------------------------- lemma 1

def kernel_l1(grid: GridSpec, j: int, t: float, kind: Semigroup = HEAT) -> float:
    """``|| F^{-1}(phi_hat_j exp(-t rate)) ||_{L^1}`` on the torus."""
    part = build_partition(grid)
    sym = part.block_symbol(j) * np.exp(-t * kind.rates(grid)) / grid.volume
    return float(lp_norm_values(ifft_values(sym, grid), grid, 1))


def _time_for(tau: float, j: int, kind: Semigroup) -> float:
    return tau / 2.0 ** (2 * j * kind.alpha)


def check_lemma1(grid: GridSpec, j_range: Sequence[int], taus: Sequence[float],
                 kind: Semigroup = HEAT, fit_window=(1.0, 10.0), collapse_tol: float = 0.05,
                 r2_min: float = 0.99) -> RatioReport:
    """Exponential decay of dyadic heat-kernel blocks.

    ``taus`` are scaled times ``2^(2 j alpha) t``.  The curves
    ``tau -> A_j(tau / 2^(2 j alpha))`` of different ``j`` should coincide
    and decay exponentially.
    """
    js = list(j_range)
    taus = np.sort(np.asarray(taus, dtype=float))
    if np.any(taus <= 0):
        raise ContractError("scaled times must be positive")
    A = np.array([[kernel_l1(grid, j, _time_for(tau, j, kind), kind) for tau in taus] for j in js])

    monotone_violation = float(np.max(np.diff(A, axis=1) / A[:, :-1], initial=-np.inf))
    collapse = float(np.max(spread(A, axis=0)))

    win = (taus >= fit_window[0]) & (taus <= fit_window[1])
    r2s = [fit_exponential(taus[win], A[i, win])[2] for i in range(len(js))]
    C, c, r2_pooled = fit_exponential(np.tile(taus[win], len(js)), A[:, win].ravel())
    cover = float(np.max(A[:, win] * np.exp(c * taus[win])))

    # rescaling identity: block j on period L equals block 0 on period 2^j L
    scaling_err = 0.0
    for i, j in enumerate(js):
        wide = GridSpec(grid.dim, grid.n, grid.period * 2.0 ** j)
        ref = np.array([kernel_l1(wide, 0, tau, kind) for tau in taus])
        scaling_err = max(scaling_err, float(np.max(np.abs(ref - A[i]) / A[i])))

    verdict = (min(r2s) >= r2_min and collapse <= collapse_tol
               and monotone_violation <= 1e-8 and c > 0)
    series = {"decay": [[float(tau), float(A[i, k]), int(j)]
                        for i, j in enumerate(js) for k, tau in enumerate(taus)]}
    return RatioReport(
        f"lemma1[{kind.name}]", cover, C, safe_ratio(cover, C), verdict,
        f"R^2 >= {r2_min} on tau in {list(fit_window)}, collapse spread <= {collapse_tol}, "
        "monotone decay",
        {"C": C, "c": c, "r2_min": min(r2s), "r2_pooled": r2_pooled, "collapse_spread": collapse,
         "monotone_violation": monotone_violation, "scaling_identity_error": scaling_err},
        params={"dim": grid.dim, "n": grid.n, "period": grid.period, "j_range": js,
                "kind": kind.name},
        series=series)


# --------------------------------------------------------------------------- lemma 2

def _block_inputs(grid: GridSpec, j: int, trials: int, rng, single_mode: bool) -> list[np.ndarray]:
    part = build_partition(grid)
    if single_mode:
        k = int(round(2.0 ** j * grid.period))
        if k != 2.0 ** j * grid.period or k >= grid.n // 2:
            raise ContractError(f"|xi| = 2^{j} is not a resolved lattice frequency")
        return [Field.mode(grid, [k] + [0] * (grid.dim - 1)).coeffs()]
    out = []
    for _ in range(trials):
        noise = rng.standard_normal(grid.shape)
        out.append(np.fft.fftn(noise) / grid.size * part.block_symbol(j))
    return out


def check_lemma2(grid: GridSpec, j_range: Sequence[int], taus: Sequence[float], trials: int = 10,
                 p: float = 2.0, seed: int = 0, kind: Semigroup = HEAT,
                 single_mode: bool = False) -> RatioReport:
    """Block-wise semigroup decay ``||T_t phi_j g||_p <= C exp(-c tau) ||phi_j g||_p``."""
    if trials < 1:
        raise ContractError("trials must be >= 1")
    taus = np.sort(np.asarray(taus, dtype=float))
    rng = np.random.default_rng(seed)
    lam = kind.rates(grid)
    rows = []  # (j, tau, r)
    identity_violation = 0.0
    for j in j_range:
        for c0 in _block_inputs(grid, j, trials, rng, single_mode):
            base = float(lp_norm_values(ifft_values(c0, grid), grid, p))
            if base == 0:
                continue
            ts = np.array([_time_for(tau, j, kind) for tau in taus])
            evolved = c0 * np.exp(-np.multiply.outer(ts, lam))
            r = lp_norm_values(ifft_values(evolved, grid), grid, p) / base
            rows.extend((j, tau, float(v)) for tau, v in zip(taus, r))
            zero = taus == 0
            if np.any(zero):
                identity_violation = max(identity_violation, float(np.max(r[zero])) - 1.0)
    if not rows:
        raise ContractError("every trial produced an empty block")
    data = np.array(rows)
    # fit the upper envelope: worst ratio over trials and blocks at each tau
    upper = np.array([data[data[:, 1] == tau, 2].max() for tau in taus])
    pos = (taus > 0) & (upper > 0)
    C, c, r2 = fit_exponential(taus[pos], upper[pos])
    envelope = data[:, 2] * np.exp(c * data[:, 1])
    cover = float(envelope.max())
    verdict = c > 0 and identity_violation <= 1e-10
    return RatioReport(
        f"lemma2[{kind.name},p={p:g}{',single' if single_mode else ''}]", cover, C,
        safe_ratio(cover, C), verdict,
        "fitted decay rate c > 0; envelope C_cover exp(-c tau) covers all trials; r(0) <= 1",
        {"C": C, "c": c, "r2": r2, "C_cover": cover, "identity_violation": identity_violation},
        params={"dim": grid.dim, "n": grid.n, "period": grid.period, "p": p, "trials": trials,
                "j_range": list(j_range), "kind": kind.name, "single_mode": single_mode},
        series={"ratios": [[float(tau), float(v), int(j)] for j, tau, v in rows]})


# --------------------------------------------------------------------------- lemma 3

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _lag_panels(T: float, max_rate: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Geometric panels on ``[0, T]`` fine enough near 0 for the fastest rate."""
    K = max(4, math.ceil(math.log2(max(T * max_rate, 1.0) / 1e-2)))
    breaks = np.concatenate([[0.0], T * 2.0 ** -np.arange(K, -1, -1)])
    lo, hi = breaks[:-1], breaks[1:]
    nodes = 0.5 * (hi - lo)[:, None] * (_GL_NODES + 1.0) + lo[:, None]
    weights = 0.5 * (hi - lo)[:, None] * _GL_WEIGHTS
    return breaks, nodes, weights


def hardy_sides(G: np.ndarray, js: Sequence[int], p: float, T: float, c: float = 1.0):
    """Both sides of the Hardy-type inequality for step functions ``g_j``.

    ``G[i, m]`` is the value of ``g_{js[i]}`` on ``[t_m, t_{m+1})``.  With
    ``f_j(u) = exp(-c 4^j u)``,

        LHS = int_0^T int_0^t (sum_j f_j(t - s) g_j(s))^p ds dt
        RHS = int_0^T sum_j 4^(-j) g_j(s)^p ds.

    Swapping the order of integration, the LHS becomes
    ``sum_m int_0^{T - t_m} w_m(u) H_m(u) du`` with
    ``H_m(u) = (sum_j g_j(t_m) f_j(u))^p`` and the trapezoidal weight
    ``w_m(u) = min(dt, T - t_m - u)``.  The lag integrals use Gauss-Legendre
    panels refined geometrically toward ``u = 0``, so step inputs are
    integrated to near machine precision even when ``c 4^j dt >> 1``.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != len(js):
        raise ContractError("G must have one row per dyadic index")
    if np.any(G < 0):
        raise ContractError("Hardy inputs must be nonnegative")
    J, M = G.shape
    dt = T / M
    rates = c * 4.0 ** np.asarray(js, dtype=float)
    rhs = dt * float(np.sum(4.0 ** (-np.asarray(js, dtype=float))[:, None] * G ** p))
    if not np.any(G > 0):
        return 0.0, rhs

    breaks, nodes, weights = _lag_panels(T, p * rates.max())
    P = weights.shape[0]
    E = np.exp(-np.multiply.outer(rates, nodes.ravel()))
    H = (G.T @ E) ** p
    I0 = (H * weights.ravel()).reshape(M, P, -1).sum(axis=-1)
    I1 = (H * (weights * nodes).ravel()).reshape(M, P, -1).sum(axis=-1)
    C0 = np.concatenate([np.zeros((M, 1)), np.cumsum(I0, axis=1)], axis=1)
    C1 = np.concatenate([np.zeros((M, 1)), np.cumsum(I1, axis=1)], axis=1)
    rows = np.arange(M)

    def cumulative(U):
        k = np.clip(np.searchsorted(breaks, U, side="right") - 1, 0, P - 1)
        lo = breaks[k]
        half = 0.5 * (U - lo)
        u = lo[:, None] + half[:, None] * (_GL_NODES + 1.0)
        w = half[:, None] * _GL_WEIGHTS
        h = np.einsum("mqj,jm->mq", np.exp(-u[:, :, None] * rates), G) ** p
        return C0[rows, k] + (w * h).sum(axis=1), C1[rows, k] + (w * u * h).sum(axis=1)

    A = (M - rows) * dt
    B = (M - rows - 1) * dt
    a0, a1 = cumulative(A)
    b0, b1 = cumulative(B)
    lhs = float(np.sum(dt * b0 + A * (a0 - b0) - (a1 - b1)))
    return lhs, rhs


def hardy_indices(j_count: int, index_mode: str) -> list[int]:
    if index_mode == "nonneg":
        return list(range(1, j_count + 1))
    if index_mode == "all_integers":
        return list(range(-j_count, j_count + 1))
    raise ContractError(f"unknown index mode {index_mode!r}")


def random_hardy_inputs(rng: np.random.Generator, js: Sequence[int], M: int, p: float) -> np.ndarray:
    """Random nonnegative step functions, one row per index.

    Each trial mixes one of three time patterns (i.i.d. cell values, a single
    burst, constant) with log-normal amplitudes scaled by ``2^(2j/p)`` so
    every block carries comparable weight on the right-hand side, and
    switches off a random subset of blocks.
    """
    js = np.asarray(js, dtype=float)
    J = js.size
    pattern = rng.integers(3)
    if pattern == 0:
        vals = rng.random((J, M))
    elif pattern == 1:
        vals = np.zeros((J, M))
        for i in range(J):
            a, b = np.sort(rng.integers(0, M + 1, size=2))
            vals[i, a:max(b, a + 1)] = 1.0
    else:
        vals = np.ones((J, M))
    active = rng.random(J) < 0.6
    if not active.any():
        active[rng.integers(J)] = True
    amp = 2.0 ** (2.0 * js / p) * np.exp(rng.standard_normal(J)) * active
    return amp[:, None] * vals


def max_hardy_ratio(p: float, js: Sequence[int], T: float, time_steps: int, trials: int,
                    seed: int, c: float = 1.0):
    rng = np.random.default_rng(seed)
    best = (0.0, 0.0, 0.0)
    for _ in range(trials):
        lhs, rhs = hardy_sides(random_hardy_inputs(rng, js, time_steps, p), js, p, T, c)
        r = safe_ratio(lhs, rhs)
        if r > best[0]:
            best = (r, lhs, rhs)
    return best


def check_lemma3(p: float, j_count: int, T: float = 1.0, time_steps: int = 1000, trials: int = 200,
                 index_mode: str = "nonneg", seed: int = 0, c: float = 1.0,
                 refine: bool = False) -> RatioReport:
    """Bounded worst-case ratio of the Hardy-type inequality over random inputs.

    With ``refine`` the maximum is recomputed with doubled time steps and
    with doubled ``j_count``; the verdict then requires every maximum to be
    within a factor 2 of the base value.
    """
    if not p > 1:
        raise ContractError(f"Hardy exponent must exceed 1, got {p}")
    if trials < 1:
        raise ContractError("trials must be >= 1")
    if j_count < 1:
        raise ContractError("j_count must be >= 1")
    js = hardy_indices(j_count, index_mode)
    ratio, lhs, rhs = max_hardy_ratio(p, js, T, time_steps, trials, seed, c)
    refinement = [["base", time_steps, j_count, ratio]]
    verdict = math.isfinite(ratio)
    if refine:
        r_t = max_hardy_ratio(p, js, T, 2 * time_steps, trials, seed, c)[0]
        r_j = max_hardy_ratio(p, hardy_indices(2 * j_count, index_mode), T, time_steps,
                              trials, seed, c)[0]
        refinement += [["time_steps_x2", 2 * time_steps, j_count, r_t],
                       ["j_count_x2", time_steps, 2 * j_count, r_j]]
        values = [ratio, r_t, r_j]
        verdict = verdict and all(math.isfinite(v) for v in values) and max(values) <= 2 * min(values)
    return RatioReport(
        f"lemma3[p={p:g},{index_mode}]", lhs, rhs, ratio, verdict,
        "max ratio finite" + ("; stable within 2x under time and index refinement" if refine else ""),
        {"max_ratio": ratio, "c": c},
        refinement=refinement,
        params={"p": p, "j_count": j_count, "T": T, "time_steps": time_steps, "trials": trials,
                "index_mode": index_mode, "seed": seed})


# --------------------------------------------------------------------------- proposition 1

def prop1_sides(g: SpaceTimeField, p: float, homogeneous: bool = False,
                kind: Semigroup = HEAT) -> tuple[float, float]:
    lhs = prop1_lhs(g, p, kind)
    rhs = frame_norm_integral(g, FrameNorm("besov", -2.0 * kind.alpha / p, p, homogeneous))
    return lhs, rhs


def check_prop1(g: SpaceTimeField, p: float, homogeneous: bool = False, kind: Semigroup = HEAT,
                refine: Callable[[int], SpaceTimeField] | None = None,
                levels: Sequence[int] = ()) -> RatioReport:
    """Space-time heat smoothing against the ``B_p^{-2 alpha / p}`` norm.

    ``refine(n)`` rebuilds the same continuum ``g`` on ``n`` points; the
    ratios on ``levels`` must stay within a factor 2 of each other.
    """
    lhs, rhs = prop1_sides(g, p, homogeneous, kind)
    ratio = safe_ratio(lhs, rhs)
    refinement = []
    verdict = math.isfinite(ratio)
    if refine is not None and levels:
        for n in levels:
            refinement.append([int(n), safe_ratio(*prop1_sides(refine(n), p, homogeneous, kind))])
        rs = [r for _, r in refinement]
        verdict = verdict and max(rs) <= 2 * min(rs) if min(rs) > 0 else verdict and max(rs) == 0
    return RatioReport(
        f"prop1[{kind.name},p={p:g}{',hom' if homogeneous else ''}]", lhs, rhs, ratio, verdict,
        "ratio finite" + ("; stable within 2x across spatial refinement" if refinement else ""),
        {"c_fit": ratio},
        refinement=refinement,
        params={"p": p, "homogeneous": homogeneous, "kind": kind.name, "n": g.grid.n,
                "steps": g.tgrid.steps, "T": g.tgrid.T})


# --------------------------------------------------------------------------- theorem 1/2

def _require_moments(nu: LevyMeasureSpec, p: float) -> tuple[float, float]:
    return beta_moment(nu, 2), beta_moment(nu, p)


def theorem_sides(g: SpaceTimeField, nu: LevyMeasureSpec, k: float, p: float,
                  homogeneous: bool, samples: int, seed: int, kind: Semigroup = HEAT,
                  workers: int = 1, lhs_norm: str = "sobolev", rhs_norm: str = "besov"):
    """``(E sum dt ||u||^p)`` estimate and ``sum dt ||g||^p`` with shifted smoothness."""
    est = mc_norm(g, nu, FrameNorm(lhs_norm, k, p, homogeneous), samples, seed, kind, workers)
    rhs_p = frame_norm_integral(g, FrameNorm(rhs_norm, k - 2.0 * kind.alpha / p, p, homogeneous))
    return est, rhs_p


def _root_report(name, est, rhs_p, p, criterion, constants, params) -> RatioReport:
    lhs = est.mean ** (1.0 / p)
    rhs = rhs_p ** (1.0 / p)
    se = est.stderr / (p * est.mean ** (1.0 - 1.0 / p)) if est.mean > 0 else 0.0
    ratio = safe_ratio(lhs, rhs)
    constants = {**constants, "moment": est.mean, "moment_stderr": est.stderr}
    return RatioReport(name, lhs, rhs, ratio, math.isfinite(ratio), criterion, constants,
                       stderr=se / rhs if rhs > 0 else 0.0, params=params)


def check_theorem(g: SpaceTimeField, nu: LevyMeasureSpec, k: float, p: float,
                  homogeneous: bool = False, samples: int = 1000, seed: int = 0,
                  kind: Semigroup = HEAT, workers: int = 1) -> RatioReport:
    """``||u||_{H^k_p} / ||g||_{B_p^{k - 2 alpha / p}}`` with Monte Carlo error."""
    b2, bp = _require_moments(nu, p)
    est, rhs_p = theorem_sides(g, nu, k, p, homogeneous, samples, seed, kind, workers)
    return _root_report(
        f"theorem[{kind.name},p={p:g},k={k:g}{',hom' if homogeneous else ''}]", est, rhs_p, p,
        "ratio finite", {"beta_2": b2, "beta_p": bp},
        {"k": k, "p": p, "homogeneous": homogeneous, "samples": samples, "seed": seed,
         "kind": kind.name, "n": g.grid.n, "steps": g.tgrid.steps, "T": g.tgrid.T})


def reduce_order(g: SpaceTimeField, k: float) -> SpaceTimeField:
    """Framewise Bessel potential ``(I - Laplacian)^(k/2) g``."""
    return g.multiply(bessel_symbol(k).values(g.grid))


def theorem_reduction(g: SpaceTimeField, nu: LevyMeasureSpec, k: float, p: float,
                      samples: int, seed: int, kind: Semigroup = HEAT, workers: int = 1) -> dict:
    """Compare the order-``k`` estimate with the order-0 estimate for the
    Bessel-lifted forcing, on the same path seeds.

    The left-hand sides agree up to rounding because the Bessel potential
    commutes with the stochastic convolution.  The right-hand sides are
    Besov norms of orders ``k - 2/p`` and ``-2/p`` and agree only up to the
    equivalence constants of the lifting.
    """
    est_k, rhs_k = theorem_sides(g, nu, k, p, False, samples, seed, kind, workers)
    est_0, rhs_0 = theorem_sides(reduce_order(g, k), nu, 0.0, p, False, samples, seed, kind, workers)
    lhs_k, lhs_0 = est_k.mean ** (1 / p), est_0.mean ** (1 / p)
    rhs_k, rhs_0 = rhs_k ** (1 / p), rhs_0 ** (1 / p)
    return {
        "lhs_direct": lhs_k, "lhs_reduced": lhs_0,
        "lhs_rel_diff": abs(lhs_k - lhs_0) / max(abs(lhs_k), 1e-300),
        "path_values_max_rel_diff": float(np.max(np.abs(est_k.values - est_0.values)
                                                 / np.maximum(np.abs(est_k.values), 1e-300))),
        "rhs_direct": rhs_k, "rhs_reduced": rhs_0,
        "rhs_rel_diff": abs(rhs_k - rhs_0) / max(abs(rhs_k), 1e-300),
        "ratio_direct": safe_ratio(lhs_k, rhs_k), "ratio_reduced": safe_ratio(lhs_0, rhs_0),
    }


# --------------------------------------------------------------------------- corollary

NORM_PAIRS = {
    "H<-H": ("sobolev", False),
    "B<-B": ("besov", False),
    "Hdot<-Hdot": ("sobolev", True),
    "Bdot<-Bdot": ("besov", True),
}


def embedding_constant(grid: GridSpec, s: float, p: float, homogeneous: bool = False,
                       trials: int = 100, seed: int = 0, kmax: int | None = None) -> float:
    """Largest ``besov_norm / sobolev_norm`` over random smooth fields."""
    kmax = kmax if kmax is not None else min(16, grid.n // 4)
    worst = 0.0
    for i in range(trials):
        f = random_decay_field(grid, slope=1.0, seed=seed + i, kmax=kmax, mean_zero=homogeneous)
        worst = max(worst, besov_norm(f, s, p, homogeneous) / sobolev_norm(f, s, p, homogeneous))
    return worst


def check_corollary(g: SpaceTimeField, nu: LevyMeasureSpec, k: float, p: float,
                    norm_pair: str = "H<-H", samples: int = 1000, seed: int = 0,
                    kind: Semigroup = HEAT, workers: int = 1,
                    embedding_trials: int = 100) -> RatioReport:
    """Same-scale estimates ``||u||_X^k <= c ||g||_X^{k - 2 alpha / p}``.

    Also measures the embedding constant of ``H^s_p`` into ``B^s_p`` at
    ``s = k - 2 alpha / p`` on the grid of ``g`` and on the doubled grid.
    """
    if norm_pair not in NORM_PAIRS:
        raise ContractError(f"unknown norm pair {norm_pair!r}; known: {', '.join(NORM_PAIRS)}")
    b2, bp = _require_moments(nu, p)
    norm, homogeneous = NORM_PAIRS[norm_pair]
    est, rhs_p = theorem_sides(g, nu, k, p, homogeneous, samples, seed, kind, workers,
                               lhs_norm=norm, rhs_norm=norm)
    s = k - 2.0 * kind.alpha / p
    kmax = min(16, g.grid.n // 4)
    c_emb = embedding_constant(g.grid, s, p, homogeneous, embedding_trials, seed, kmax)
    fine = GridSpec(g.grid.dim, 2 * g.grid.n, g.grid.period)
    c_emb_fine = embedding_constant(fine, s, p, homogeneous, embedding_trials, seed, kmax)
    report = _root_report(
        f"corollary[{norm_pair},{kind.name},p={p:g},k={k:g}]", est, rhs_p, p,
        "ratio finite; embedding constant finite and stable within 2x under n doubling",
        {"beta_2": b2, "beta_p": bp, "C_emb": c_emb, "C_emb_refined": c_emb_fine},
        {"k": k, "p": p, "norm_pair": norm_pair, "samples": samples, "seed": seed,
         "kind": kind.name, "n": g.grid.n, "steps": g.tgrid.steps, "T": g.tgrid.T})
    report.refinement = [[g.grid.n, c_emb], [fine.n, c_emb_fine]]
    report.verdict = (report.verdict and math.isfinite(c_emb)
                      and max(c_emb, c_emb_fine) <= 2 * min(c_emb, c_emb_fine))
    return report


# --------------------------------------------------------------------------- isometry, Kunita

def check_isometry(g: SpaceTimeField, nu: LevyMeasureSpec, samples: int = 10_000, seed: int = 0,
                   kind: Semigroup = HEAT, workers: int = 1, n_se: float = 4.0) -> RatioReport:
    """Monte Carlo ``E sum dt ||u||_2^2`` against ``beta_2`` times the quadrature."""
    est = mc_norm(g, nu, FrameNorm("sobolev", 0.0, 2.0), samples, seed, kind, workers)
    target = isometry_value(g, nu, kind)
    ok = est.within(target, n_se)
    return RatioReport(
        f"isometry[{kind.name}]", est.mean, target, safe_ratio(est.mean, target), ok,
        f"|MC - oracle| <= {n_se:g} standard errors",
        {"beta_2": beta_moment(nu, 2), "z_score": (est.mean - target) / est.stderr
         if est.stderr > 0 else 0.0},
        stderr=est.stderr,
        params={"samples": samples, "seed": seed, "kind": kind.name, "n": g.grid.n,
                "steps": g.tgrid.steps, "T": g.tgrid.T})


def kunita_ratio(g: SpaceTimeField, nu: LevyMeasureSpec, p: float, samples: int, seed: int,
                 kind: Semigroup = HEAT, scheme: str = EULER_GRID) -> dict:
    est = mc_norm(g, nu, FrameNorm("sobolev", 0.0, p), samples, seed, kind, scheme=scheme)
    b2, bp = _require_moments(nu, p)
    t1 = prop1_lhs(g, p, kind)
    t2 = quadratic_variation_term(g, p, kind)
    bound = bp * t1 + b2 ** (p / 2.0) * t2
    return {"moment": est.mean, "stderr": est.stderr, "term1": t1, "term2": t2,
            "bound": bound, "ratio": safe_ratio(est.mean, bound)}


def check_kunita(configs: Sequence[tuple[SpaceTimeField, LevyMeasureSpec]], p: float,
                 samples: int = 500, seed: int = 0, kind: Semigroup = HEAT,
                 scheme: str = EULER_GRID) -> RatioReport:
    """Moment bound ``E||u||^p <= C (beta_p term1 + beta_2^(p/2) term2)``.

    Both terms are left-endpoint quadratures, so the default Euler scheme
    is their exact stochastic counterpart at any step size.  ``C`` is
    fitted on the first half of the configurations; the verdict requires
    the second half to stay below ``2 C``.
    """
    rows = [kunita_ratio(g, nu, p, samples, seed + i, kind, scheme)
            for i, (g, nu) in enumerate(configs)]
    ratios = np.array([r["ratio"] for r in rows])
    half = max(1, len(rows) // 2)
    fitted = float(ratios[:half].max())
    held = float(ratios[half:].max()) if len(rows) > half else fitted
    verdict = bool(np.all(np.isfinite(ratios)) and held <= 2 * fitted and ratios.min() > 0)
    worst = int(np.argmax(ratios))
    return RatioReport(
        f"kunita[{kind.name},p={p:g}]", rows[worst]["moment"], rows[worst]["bound"],
        float(ratios.max()), verdict,
        "held-out configurations below 2x the constant fitted on the first half",
        {"fitted_C": fitted, "held_out_max": held, "min_ratio": float(ratios.min())},
        params={"p": p, "configs": len(rows), "samples": samples, "seed": seed, "scheme": scheme},
        series={"configs": [[i, r["ratio"], r["term1"], r["term2"]] for i, r in enumerate(rows)]})

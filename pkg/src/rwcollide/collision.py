"""Exact computations on the two- and three-walker product chains.

Product states are indexed row-major: ``(a, b) -> a*n + b`` and
``(x, y, z) -> x*n*n + y*n + z``. Each walker applies one step of ``P`` at
its own rate, so exactly one coordinate moves per transition.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import bicgstab, gmres, spsolve

from .chain import ChainSpec, SpeedTriple, check_reversible, stationary
from .curves import DistributionCurve, as_grid
from .errors import CapacityExceeded, HypothesisViolation, InvalidParameter, SolverFailure
from .hitting import anchored_set, hitting_cdf, hitting_moments
from .uniformization import DEFAULT_TOL, transient_survival

DEFAULT_CAPACITY = 300_000
CAPACITY_ENV = "RWCOLLIDE_CAPACITY"
TIE_RULES = ("strict", "weak")
DENSE_SOLVE_MAX = 3000


def default_capacity() -> int:
    raw = os.environ.get(CAPACITY_ENV)
    return int(raw) if raw else DEFAULT_CAPACITY


# ----------------------------------------------------------- pair chain


def pair_rates(chain: ChainSpec, lambda_a: float, lambda_b: float) -> sp.csr_matrix:
    """Off-diagonal-free rate operator ``lambda_a P(x)I + lambda_b I(x)P`` on n^2 states."""
    P = chain.matrix
    eye = sp.identity(chain.n, format="csr")
    return (lambda_a * sp.kron(P, eye, format="csr") + lambda_b * sp.kron(eye, P, format="csr")).tocsr()


def _pair_transient(n):
    idx = np.arange(n * n)
    return idx[(idx // n) != (idx % n)]


def meeting_cdf(chain: ChainSpec, lambda_a: float, lambda_b: float, a0: int, b0: int, t_grid,
                tol: float = DEFAULT_TOL) -> DistributionCurve:
    """CDF of the first time two independent walkers (rates ``lambda_a``, ``lambda_b``) coincide."""
    if lambda_a < 0 or lambda_b < 0:
        raise InvalidParameter("speeds must be nonnegative")
    t = as_grid(t_grid)
    meta = {"start": [int(a0), int(b0)], "speeds": [float(lambda_a), float(lambda_b)]}
    rate = lambda_a + lambda_b
    if a0 == b0:
        return DistributionCurve(t, np.ones_like(t), 0.0, "meeting", rate, meta=meta)
    if rate == 0:
        return DistributionCurve(t, np.zeros_like(t), 0.0, "meeting", 0.0, degenerate=True, meta=meta)
    n = chain.n
    rest = _pair_transient(n)
    K = (pair_rates(chain, lambda_a, lambda_b)[rest][:, rest] / rate).tocsr()
    start = np.zeros(len(rest))
    start[np.searchsorted(rest, a0 * n + b0)] = 1.0
    res = transient_survival(K, rate, t, start=start, tol=tol)
    return DistributionCurve(t, 1.0 - res.values, res.err_bound, "meeting", rate, meta=meta)


@dataclass(frozen=True)
class IdentityGap:
    sup_gap: float
    grid: np.ndarray
    pair: tuple[int, int]
    speeds: tuple[float, float]
    err_bound: float


def identity_gap(chain: ChainSpec, x: int, z: int, lambda_y: float, lambda_z: float, t_grid,
                 tol: float = DEFAULT_TOL, check_hypotheses: bool = True) -> IdentityGap:
    """Sup over the grid of ``|P_x(tau_z <= (ly+lz) t) - P_(x,z)(M^{Y,Z} <= t)|``."""
    s = lambda_y + lambda_z
    if not s > 0:
        raise InvalidParameter("lambda_y + lambda_z must be positive")
    if check_hypotheses and not check_reversible(chain).reversible:
        raise HypothesisViolation("identity gap needs a reversible chain")
    t = as_grid(t_grid)
    g = hitting_cdf(chain, x, z, s, t, tol=tol)
    f = meeting_cdf(chain, lambda_y, lambda_z, x, z, t, tol=tol)
    gap = float(np.max(np.abs(g.values - f.values)))
    return IdentityGap(gap, t, (int(x), int(z)), (float(lambda_y), float(lambda_z)), g.err_bound + f.err_bound)


# ---------------------------------------------------------- triple chain


@dataclass(frozen=True)
class ProductGenerator:
    n: int
    rates: sp.csr_matrix  # off-diagonal rates plus self-loop rates of P
    total_rate: float
    good: np.ndarray  # boolean masks over n^3 states
    bad: np.ndarray
    transient: np.ndarray
    triple: np.ndarray  # x == y == z (a subset of bad)

    @property
    def generator(self) -> sp.csr_matrix:
        return (self.rates - self.total_rate * sp.identity(self.n**3, format="csr")).tocsr()


def product_generator(chain: ChainSpec, speeds: SpeedTriple) -> ProductGenerator:
    n = chain.n
    P = chain.matrix
    eye = sp.identity(n, format="csr")
    lx, ly, lz = speeds.as_array()
    R = sp.csr_matrix((n**3, n**3))
    if lx:
        R = R + lx * sp.kron(sp.kron(P, eye), eye, format="csr")
    if ly:
        R = R + ly * sp.kron(sp.kron(eye, P), eye, format="csr")
    if lz:
        R = R + lz * sp.kron(sp.kron(eye, eye), P, format="csr")
    idx = np.arange(n**3)
    x, y, z = idx // (n * n), (idx // n) % n, idx % n
    bad = (x == z) | (y == z)
    good = (x == y) & ~bad
    return ProductGenerator(n, R.tocsr(), speeds.total, good, bad, ~(good | bad), (x == y) & (x == z))


@dataclass(frozen=True)
class CollisionReport:
    probability: float
    tie_rule: str
    method: str
    start_breakdown: dict
    residual: float
    speeds: tuple
    n_states: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "probability": self.probability,
            "tie_rule": self.tie_rule,
            "method": self.method,
            "start_breakdown": self.start_breakdown,
            "residual": self.residual,
            "speeds": list(self.speeds),
            "n_states": self.n_states,
            **self.extra,
        }


def _solve(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    """Dense LU for small blocks; Jacobi-preconditioned Krylov otherwise, sparse LU as last resort."""
    if A.shape[0] <= DENSE_SOLVE_MAX:
        return np.linalg.solve(A.toarray(), b)
    M = sp.diags(1.0 / A.diagonal())
    scale = max(float(np.abs(b).max()), 1.0)
    x, info = bicgstab(A, b, M=M, rtol=1e-14, atol=0.0, maxiter=50_000)
    if info == 0 and np.abs(A @ x - b).max() <= 1e-12 * scale:
        return x
    x, info = gmres(A, b, M=M, rtol=1e-14, atol=0.0, restart=60, maxiter=5_000)
    if info == 0 and np.abs(A @ x - b).max() <= 1e-12 * scale:
        return x
    return spsolve(A.tocsc(), b, permc_spec="COLAMD")


def absorption_vector(chain: ChainSpec, speeds: SpeedTriple, tie_rule: str = "strict",
                      capacity: int | None = None):
    """Per-start success probabilities over all n^3 product states, and the solve residual.

    Good-before-bad is decided on the transient block by
    ``(total_rate I - R)_TT h = R_TG 1``; time-0 classes are set directly.
    """
    if tie_rule not in TIE_RULES:
        raise InvalidParameter(f"tie_rule must be one of {TIE_RULES}, got {tie_rule!r}")
    cap = default_capacity() if capacity is None else capacity
    n = chain.n
    if n**3 > cap:
        raise CapacityExceeded(f"{n**3} product states exceed exact capacity {cap}; use Monte Carlo")
    G = product_generator(chain, speeds)
    h = np.zeros(n**3)
    h[G.good] = 1.0
    if tie_rule == "weak":
        h[G.triple] = 1.0
    T = np.flatnonzero(G.transient)
    residual = 0.0
    if len(T):
        R = G.rates
        RT = R[T]
        A = (G.total_rate * sp.identity(len(T), format="csr") - RT[:, T]).tocsr()
        b = np.asarray(RT[:, np.flatnonzero(G.good)].sum(axis=1)).ravel()
        with np.errstate(all="ignore"):
            sol = _solve(A, b)
        if not np.all(np.isfinite(sol)):
            raise SolverFailure("transient block of the product chain is singular")
        residual = float(np.max(np.abs(A @ sol - b)))
        if residual > 1e-8:
            raise SolverFailure(f"absorption solve residual {residual:.3e} too large")
        h[T] = np.clip(sol, 0.0, 1.0)
    return h, residual, G


def collision_exact(chain: ChainSpec, speeds: SpeedTriple, tie_rule: str = "strict",
                    capacity: int | None = None) -> CollisionReport:
    """``P(M_good < M_bad)`` (strict) or ``P(M_good <= M_bad)`` (weak) from pi x pi x pi."""
    h, residual, G = absorption_vector(chain, speeds, tie_rule, capacity)
    pi = stationary(chain)
    w = np.einsum("i,j,k->ijk", pi, pi, pi).ravel()
    breakdown = {
        "good_at_0": float(w[G.good].sum()),
        "bad_at_0": float(w[G.bad].sum()),
        "triple_at_0": float(w[G.triple].sum()),
        "transient": float(w[G.transient].sum()),
    }
    prob = float(np.clip(w @ h, 0.0, 1.0))
    return CollisionReport(prob, tie_rule, "exact", breakdown, residual,
                           tuple(speeds.as_array().tolist()), chain.n**3)


def collision_from(chain: ChainSpec, speeds: SpeedTriple, start, tie_rule: str = "strict",
                   capacity: int | None = None) -> float:
    x, y, z = (int(v) for v in start)
    n = chain.n
    if not all(0 <= v < n for v in (x, y, z)):
        raise InvalidParameter(f"start {start} out of range for n={n}")
    h, _, _ = absorption_vector(chain, speeds, tie_rule, capacity)
    return float(h[x * n * n + y * n + z])


# ------------------------------------------------- small-time corollary


@dataclass(frozen=True)
class MeetingSmallTimeProfile:
    x: int
    thetas: np.ndarray
    lhs_xz: np.ndarray
    bound_xz: np.ndarray  # 6 sqrt((1 + lz) theta)
    lhs_yz: np.ndarray
    bound_yz: np.ndarray  # 6 sqrt((ly + lz) theta)


def _meeting_cdf_mixed(chain: ChainSpec, lambda_a: float, lambda_b: float, start: np.ndarray, t,
                       tol: float) -> np.ndarray:
    """Meeting CDF for a start distribution over pair states (linear in the start)."""
    n = chain.n
    start = start.ravel()
    diag = start[np.arange(n) * (n + 1)].sum()
    rate = lambda_a + lambda_b
    if rate == 0:
        return np.full(len(t), diag)
    rest = _pair_transient(n)
    K = (pair_rates(chain, lambda_a, lambda_b)[rest][:, rest] / rate).tocsr()
    res = transient_survival(K, rate, t, start=start[rest], tol=tol)
    return 1.0 - res.values


def meeting_small_time_profile(chain: ChainSpec, x: int, thetas, lambda_y: float, lambda_z: float,
                               tol: float = DEFAULT_TOL) -> MeetingSmallTimeProfile:
    """pi(A_x)-averaged meeting CDFs at ``theta * t_hit`` for the pairs (X,Z) and (Y,Z).

    The average over z is one meeting CDF from the mixed start
    ``delta_x (x) pi|A_x``, computed by a single uniformization.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    set_a, _, _ = anchored_set(chain, x)
    hs = hitting_moments(chain)
    pi = hs.pi
    grid = thetas * hs.t_hit
    start = np.zeros((chain.n, chain.n))
    start[x, set_a] = pi[set_a] / pi[set_a].sum()
    xz = _meeting_cdf_mixed(chain, 1.0, lambda_z, start, grid, tol)
    yz = _meeting_cdf_mixed(chain, lambda_y, lambda_z, start, grid, tol)
    return MeetingSmallTimeProfile(
        x, thetas, xz, 6 * np.sqrt((1 + lambda_z) * thetas),
        yz, 6 * np.sqrt((lambda_y + lambda_z) * thetas),
    )

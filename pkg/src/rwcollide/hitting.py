"""Hitting times of a single chain: expectations, CDFs, killed spectra, small-time profiles.

All expectations are for the speed-1 continuous-time chain; a walker with
speed ``s`` has the same law with times divided by ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .automorphism import DEFAULT_BUDGET, check_transitive
from .chain import ChainSpec, stationary
from .curves import DistributionCurve, as_grid
from .errors import CapacityExceeded, HypothesisViolation, InvalidParameter, SolverFailure
from .spectral import DENSE_CAP, negative_set, spectral_summary, symmetrized
from .uniformization import DEFAULT_TOL, transient_survival


@dataclass(frozen=True)
class HittingSummary:
    expectations: np.ndarray  # f[x, z] = E_x[tau_z]
    t_hit: float
    t_star_hit: float
    from_pi: np.ndarray  # E_pi[tau_z] per z
    pi: np.ndarray

    def to_dict(self) -> dict:
        return {
            "t_hit": self.t_hit,
            "t_star_hit": self.t_star_hit,
            "E_pi_tau": self.from_pi.tolist(),
            "expectations": self.expectations.tolist(),
        }


def _complement(n, target):
    mask = np.ones(n, dtype=bool)
    mask[np.atleast_1d(target)] = False
    return np.flatnonzero(mask)


def expected_hitting_column(chain: ChainSpec, z: int) -> np.ndarray:
    """``E_x[tau_z]`` for every x, from ``(I - P) f = 1`` off ``z`` with ``f(z) = 0``."""
    rest = _complement(chain.n, z)
    L = (sp.identity(chain.n, format="csr") - chain.matrix)[rest][:, rest].tocsc()
    try:
        sol = splu(L).solve(np.ones(len(rest)))
    except RuntimeError as e:
        raise SolverFailure(f"hitting-time system for target {z} is singular: {e}") from None
    f = np.zeros(chain.n)
    f[rest] = sol
    if not np.all(np.isfinite(f)):
        raise SolverFailure(f"non-finite hitting times for target {z}")
    return f


def hitting_moments(chain: ChainSpec, targets=None) -> HittingSummary:
    """Expected hitting times; ``targets`` restricts which columns are solved."""
    n = chain.n
    if targets is None:
        if n > DENSE_CAP:
            raise CapacityExceeded(f"full hitting matrix capped at {DENSE_CAP} states; pass targets=")
        targets = range(n)
    targets = list(targets)
    pi = stationary(chain)
    f = np.full((n, n), np.nan) if n <= DENSE_CAP else None
    t_hit = 0.0
    from_pi = np.full(n, np.nan)
    for z in targets:
        col = expected_hitting_column(chain, z)
        if f is not None:
            f[:, z] = col
        t_hit = max(t_hit, float(col.max()))
        from_pi[z] = float(pi @ col)
    return HittingSummary(
        expectations=f if f is not None else np.empty((0, 0)),
        t_hit=t_hit,
        t_star_hit=float(np.nanmax(from_pi)),
        from_pi=from_pi,
        pi=pi,
    )


def estimate_t_star_hit(chain: ChainSpec, max_targets: int = 16, seed: int = 0) -> float:
    """Exact ``t*_hit`` up to a few hundred states, else a max over sampled targets."""
    n = chain.n
    if n <= 512:
        return hitting_moments(chain).t_star_hit
    pi = stationary(chain)
    rng = np.random.default_rng(seed)
    picks = {int(np.argmin(pi)), int(np.argmax(pi))}
    picks.update(int(z) for z in rng.choice(n, size=min(max_targets, n), replace=False))
    return hitting_moments(chain, targets=sorted(picks)).t_star_hit


def _killed_matrix(chain: ChainSpec, rest):
    return chain.matrix[rest][:, rest]


def hitting_survival_all(chain: ChainSpec, target, speed: float, t_grid, tol=DEFAULT_TOL):
    """``P_x(tau_target > t)`` for all x on the grid; shape (len(grid), n)."""
    t = as_grid(t_grid)
    rest = _complement(chain.n, target)
    res = transient_survival(_killed_matrix(chain, rest), speed, t, tol=tol)
    out = np.zeros((len(t), chain.n))
    out[:, rest] = res.values
    return out, res.err_bound


def hitting_cdf(chain: ChainSpec, x: int, z, speed: float, t_grid, tol: float = DEFAULT_TOL) -> DistributionCurve:
    """CDF of the hitting time of ``z`` (a state or a set of states) from ``x``.

    The killed generator ``speed * (P - I)`` off the target is exponentiated
    by uniformization; ``err_bound`` certifies every grid value.
    """
    if not speed > 0:
        raise InvalidParameter(f"speed must be positive, got {speed}")
    t = as_grid(t_grid)
    targets = np.atleast_1d(z)
    if x in set(int(v) for v in targets):
        return DistributionCurve(t, np.ones_like(t), 0.0, "hitting", float(speed))
    rest = _complement(chain.n, targets)
    start = np.zeros(len(rest))
    start[np.searchsorted(rest, x)] = 1.0
    res = transient_survival(_killed_matrix(chain, rest), speed, t, start=start, tol=tol)
    return DistributionCurve(t, 1.0 - res.values, res.err_bound, "hitting", float(speed),
                             meta={"start": int(x), "target": targets.tolist()})


@dataclass(frozen=True)
class KilledSpectrum:
    target: int
    gammas: np.ndarray  # distinct eigenvalues of -Q_z that carry weight, ascending
    weights: np.ndarray  # p_i, summing to 1
    alpha: np.ndarray  # quasistationary distribution on all states (0 at target)
    all_gammas: np.ndarray
    expected_from_alpha: float  # E_alpha[tau_z] from a direct solve
    pi_target: float


def killed_spectrum(chain: ChainSpec, z: int, weight_floor: float = 1e-12) -> KilledSpectrum:
    """Eigen-decomposition of the generator killed at ``z``, weighted by the pi start.

    ``P_pi(tau_z > t | X_0 != z) = sum_i p_i exp(-gamma_i t)``. Eigenvalues
    within 1e-9 of each other are merged; ones whose weight is below
    ``weight_floor`` are dropped from ``gammas`` (kept in ``all_gammas``).
    """
    S, pi = symmetrized(chain)
    rest = _complement(chain.n, z)
    Sz = np.eye(len(rest)) - S[np.ix_(rest, rest)]
    g, V = np.linalg.eigh(0.5 * (Sz + Sz.T))
    r = np.sqrt(pi[rest])
    c = (V.T @ r) ** 2
    c = c / c.sum()
    gammas, weights = [], []
    for gi, ci in zip(g, c):
        if gammas and abs(gi - gammas[-1]) <= 1e-9 * max(1.0, abs(gi)):
            weights[-1] += ci
        else:
            gammas.append(gi)
            weights.append(ci)
    gammas = np.array(gammas)
    weights = np.clip(np.array(weights), 0.0, None)
    keep = weights > weight_floor
    if not keep[0] or gammas[0] <= 0:
        raise SolverFailure("ground state of the killed generator carries no weight")
    alpha = np.zeros(chain.n)
    a = np.abs(V[:, 0]) * r
    alpha[rest] = a / a.sum()
    e_alpha = float(alpha @ expected_hitting_column(chain, z))
    return KilledSpectrum(
        target=int(z),
        gammas=gammas[keep],
        weights=weights[keep] / weights[keep].sum(),
        alpha=alpha,
        all_gammas=np.asarray(g),
        expected_from_alpha=e_alpha,
        pi_target=float(pi[z]),
    )


@dataclass(frozen=True)
class ConditionalResidualCurve:
    s: np.ndarray
    values: np.ndarray  # E_pi[tau_z - s | tau_z > s]
    limit: float  # 1/gamma_1
    bound: float  # E_pi[tau_z] + t_rel_cont
    expected_from_pi: float
    t_rel_cont: float


def aldous_brown_curve(chain: ChainSpec, z: int, s_grid) -> ConditionalResidualCurve:
    """Mean residual life ``E_pi[tau_z - s | tau_z > s]`` from the killed spectrum."""
    s = as_grid(s_grid)
    ks = killed_spectrum(chain, z)
    g, p = ks.gammas, ks.weights
    decay = np.exp(-(g[None, :] - g[0]) * s[:, None]) * p[None, :]
    vals = (decay / g[None, :]).sum(axis=1) / decay.sum(axis=1)
    spec = spectral_summary(chain)
    e_pi = float(stationary(chain) @ expected_hitting_column(chain, z))
    return ConditionalResidualCurve(
        s=s,
        values=vals,
        limit=float(1.0 / g[0]),
        bound=e_pi + spec.t_rel_cont,
        expected_from_pi=e_pi,
        t_rel_cont=spec.t_rel_cont,
    )


@dataclass(frozen=True)
class SmallTimeProfile:
    x: int
    thetas: np.ndarray
    lhs: np.ndarray
    bound: np.ndarray  # 6 sqrt(theta)
    set_a: np.ndarray
    pi_a: float
    t_hit: float


def anchored_set(chain: ChainSpec, x: int, budget: int = DEFAULT_BUDGET):
    """Negative set transported by an automorphism that carries its anchor to ``x``."""
    rep = check_transitive(chain, budget)
    if not rep.transitive:
        raise HypothesisViolation(f"chain is not transitive (verdict: {rep.verdict})")
    ns = negative_set(chain)
    to_x = rep.automorphisms[x]
    to_anchor = rep.automorphisms[ns.anchor]
    inv_anchor = np.empty_like(to_anchor)
    inv_anchor[to_anchor] = np.arange(chain.n)
    sigma = to_x[inv_anchor]  # anchor -> 0 -> x
    return np.sort(sigma[ns.set_a]), ns, rep


def small_time_profile(chain: ChainSpec, x: int, theta, tol: float = DEFAULT_TOL) -> SmallTimeProfile:
    """pi-weighted average over ``A_x`` of ``P_x(tau_z <= theta * t_hit)``, with 6 sqrt(theta)."""
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(thetas <= 0):
        raise InvalidParameter("theta must be positive")
    set_a, _, _ = anchored_set(chain, x)
    hs = hitting_moments(chain)
    pi = hs.pi
    grid = thetas * hs.t_hit
    acc = np.zeros(len(thetas))
    for z in set_a:
        acc += pi[z] * hitting_cdf(chain, x, int(z), 1.0, grid, tol=tol).values
    pi_a = float(pi[set_a].sum())
    return SmallTimeProfile(x, thetas, acc / pi_a, 6.0 * np.sqrt(thetas), set_a, pi_a, hs.t_hit)

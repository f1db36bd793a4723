"""Spectrum of a reversible transition matrix and the second-eigenfunction negative set."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, check_reversible, stationary
from .errors import CapacityExceeded, HypothesisViolation, SolverFailure

DENSE_CAP = 4096
EIG_CLUSTER_TOL = 1e-9


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray  # descending
    lambda_star: float
    lambda_2: float
    t_rel_abs: float
    t_rel_cont: float

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "lambda_star": self.lambda_star,
            "lambda_2": self.lambda_2,
            "t_rel_abs": self.t_rel_abs,
            "t_rel_cont": self.t_rel_cont,
        }


def _require_reversible(chain: ChainSpec, pi):
    rep = check_reversible(chain, pi=pi)
    if not rep.reversible:
        raise HypothesisViolation(f"chain is not reversible (detailed-balance residual {rep.residual:.3e})")


def symmetrized(chain: ChainSpec, pi=None):
    """Dense ``D^{1/2} P D^{-1/2}`` (D = diag pi), symmetrized against rounding."""
    if chain.n > DENSE_CAP:
        raise CapacityExceeded(f"dense eigensolve capped at {DENSE_CAP} states, chain has {chain.n}")
    if pi is None:
        pi = stationary(chain)
    _require_reversible(chain, pi)
    r = np.sqrt(pi)
    S = chain.dense() * r[:, None] / r[None, :]
    return 0.5 * (S + S.T), pi


def _eigh_desc(S):
    w, V = np.linalg.eigh(S)
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def spectral_summary(chain: ChainSpec) -> SpectralSummary:
    S, _ = symmetrized(chain)
    w, _ = _eigh_desc(S)
    if abs(w[0] - 1.0) > 1e-10:
        raise SolverFailure(f"top eigenvalue {w[0]!r} is not 1")
    w = np.clip(w, -1.0, 1.0)
    w[0] = 1.0
    lam2 = float(w[1])
    lam_star = float(np.max(np.abs(w[1:])))
    t_abs = np.inf if lam_star >= 1.0 - 1e-12 else 1.0 / (1.0 - lam_star)
    t_cont = np.inf if lam2 >= 1.0 - 1e-12 else 1.0 / (1.0 - lam2)
    return SpectralSummary(w, lam_star, lam2, float(t_abs), float(t_cont))


@dataclass(frozen=True)
class NegativeSet:
    phi: np.ndarray
    set_a: np.ndarray  # sorted state indices with phi <= 0
    anchor: int
    pi_a: float
    lambda_2: float
    eigen_residual: float


def negative_set(chain: ChainSpec) -> NegativeSet:
    """Eigenfunction for the second eigenvalue, signed so its nonpositive set has mass >= 1/2.

    In a degenerate eigenspace every basis vector returned by the solver is
    sign-normalized and the one with lexicographically largest (rounded)
    entry vector is kept.
    """
    S, pi = symmetrized(chain)
    w, V = _eigh_desc(S)
    lam2 = float(w[1])
    cluster = [i for i in range(1, len(w)) if abs(w[i] - lam2) <= EIG_CLUSTER_TOL]
    r = np.sqrt(pi)
    best = None
    for i in cluster:
        phi = V[:, i] / r
        phi = phi / np.max(np.abs(phi))
        phi = _sign_normalize(phi, pi)
        key = tuple(np.round(phi, 9))
        if best is None or key > best[0]:
            best = (key, phi)
    phi = best[1]
    zero = 1e-12
    set_a = np.flatnonzero(phi <= zero)
    resid = float(np.max(np.abs(chain.matrix @ phi - lam2 * phi)))
    return NegativeSet(
        phi=phi,
        set_a=set_a,
        anchor=int(np.argmax(phi)),
        pi_a=float(pi[set_a].sum()),
        lambda_2=lam2,
        eigen_residual=resid,
    )


def _sign_normalize(phi, pi):
    zero = 1e-12
    mass_neg = pi[phi <= zero].sum()
    mass_pos = pi[phi >= -zero].sum()
    if mass_neg < 0.5 - 1e-12:
        return -phi
    if mass_neg >= 0.5 - 1e-12 and mass_pos >= 0.5 - 1e-12:
        # both signs admissible: make the first clearly nonzero entry positive
        nz = np.flatnonzero(np.abs(phi) > 1e-9)
        if len(nz) and phi[nz[0]] < 0:
            return -phi
    return phi

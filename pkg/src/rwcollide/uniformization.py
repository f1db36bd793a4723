"""Certified transient survival probabilities for killed CTMCs by uniformization.

For a killed generator ``Q_T = rate * (K - I)`` with ``K`` substochastic,

    P_x(not absorbed by t) = sum_k Poisson(k; rate*t) * (K^k 1)(x).

Every ``K^k 1`` lies in ``[0, 1]`` and is nonincreasing in ``k``, so the
omitted tail is bounded both by the Poisson tail mass and by ``max(K^k 1)``
at the stopping index. The series stops at whichever bound first drops
below ``tol``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.stats import poisson

DEFAULT_TOL = 1e-10
_CHUNK = 256
_MAX_TERMS = 5_000_000


@dataclass(frozen=True)
class SurvivalResult:
    values: np.ndarray  # (len(times),) for a start distribution, (len(times), m) otherwise
    err_bound: float
    terms: int


def _cutoff(mu_max: float, tol: float) -> int:
    if mu_max <= 0:
        return 0
    k = int(poisson.isf(tol / 4, mu_max)) + 1
    while poisson.sf(k, mu_max) > tol / 2:
        k += max(1, int(np.sqrt(mu_max)))
    return k


def transient_survival(K, rate: float, times, start=None, tol: float = DEFAULT_TOL) -> SurvivalResult:
    """Survival probabilities on ``times`` for the chain killed outside the rows of ``K``.

    ``start`` is a (possibly defective) distribution over the transient
    states; when None, survival is returned for every transient start.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    K = sp.csr_matrix(K)
    m = K.shape[0]
    mu = rate * times
    kmax = _cutoff(float(mu.max(initial=0.0)), tol)
    if kmax > _MAX_TERMS:
        raise ValueError(f"uniformization would need {kmax} terms; shorten the time grid")
    budget = tol / 2
    if start is None:
        out = np.zeros((len(times), m))
        vec = np.ones(m)
        step = lambda v: K @ v  # noqa: E731
    else:
        out = np.zeros(len(times))
        vec = np.asarray(start, dtype=float).copy()
        KT = K.T.tocsr()
        step = lambda v: KT @ v  # noqa: E731

    k = 0
    trunc = 0.0
    while True:
        hi = min(k + _CHUNK, kmax + 1)
        ks = np.arange(k, hi)
        W = poisson.pmf(ks[:, None], mu[None, :])  # (chunk, ngrid)
        block = np.empty((len(ks), m)) if start is None else np.empty(len(ks))
        stop_at = None
        for r in range(len(ks)):
            block[r] = vec if start is None else vec.sum()
            level = vec.max(initial=0.0) if start is None else vec.sum()
            vec = step(vec)
            if level <= budget:
                stop_at = r + 1
                trunc = level
                break
        if stop_at is not None:
            W = W[:stop_at]
            block = block[:stop_at]
        out += W.T @ block
        k += len(block)
        if stop_at is not None:
            break
        if k > kmax:
            trunc = float(poisson.sf(kmax, mu.max(initial=0.0)))
            break
    err = trunc + 1e-15 * max(k, 1)
    return SurvivalResult(values=np.clip(out, 0.0, 1.0), err_bound=float(err), terms=k)

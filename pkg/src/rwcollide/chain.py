"""Finite transition matrices, the chain families used throughout, and structural checks.

States are integers ``0..n-1``. A :class:`ChainSpec` stores its transition
matrix in CSR form (diagonal entries kept explicitly when nonzero) and is
validated on construction: entries in ``[0, 1]``, rows summing to one, and a
strongly connected support graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .errors import InvalidParameter, SolverFailure

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
REVERSIBLE_TOL = 1e-10

FAMILIES = ("complete", "cycle", "directed-cycle", "hypercube", "trap", "custom")


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """Validated finite transition matrix with family metadata."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    labels: tuple[str, ...] | None = None
    family: str = "custom"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("indptr", "indices", "data"):
            getattr(self, name).setflags(write=False)
        _validate(self)

    @classmethod
    def from_matrix(cls, P, labels=None, family="custom", params=None) -> "ChainSpec":
        """Build from any dense or sparse square matrix; zeros are dropped."""
        M = sp.csr_matrix(P, dtype=float)
        if M.shape[0] != M.shape[1]:
            raise InvalidParameter(f"transition matrix must be square, got {M.shape}")
        M.eliminate_zeros()
        M.sort_indices()
        return cls(
            n=M.shape[0],
            indptr=M.indptr.astype(np.int64),
            indices=M.indices.astype(np.int64),
            data=M.data.astype(float),
            labels=tuple(labels) if labels is not None else None,
            family=family,
            params=dict(params or {}),
        )

    @classmethod
    def from_triples(cls, n, triples, **kw) -> "ChainSpec":
        rows, cols, vals = zip(*triples) if triples else ((), (), ())
        for i, j in zip(rows, cols):
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidParameter(f"state index out of range in entry ({i}, {j})")
        M = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        return cls.from_matrix(M, **kw)

    @property
    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def row(self, x: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[x], self.indptr[x + 1]
        return [(int(j), float(p)) for j, p in zip(self.indices[lo:hi], self.data[lo:hi])]

    def triples(self):
        for x in range(self.n):
            for y, p in self.row(x):
                yield x, y, p

    def describe(self) -> dict[str, Any]:
        return {"family": self.family, "params": dict(self.params), "n": self.n}


def _validate(chain: ChainSpec) -> None:
    n = chain.n
    if n < 2:
        raise InvalidParameter(f"a chain needs at least 2 states, got n={n}")
    if len(chain.indptr) != n + 1:
        raise InvalidParameter("indptr length does not match n")
    if chain.labels is not None and len(chain.labels) != n:
        raise InvalidParameter(f"expected {n} labels, got {len(chain.labels)}")
    d = chain.data
    if np.any(~np.isfinite(d)) or np.any(d < 0) or np.any(d > 1):
        bad = int(np.flatnonzero((~np.isfinite(d)) | (d < 0) | (d > 1))[0])
        row = int(np.searchsorted(chain.indptr, bad, side="right") - 1)
        raise InvalidParameter(f"row {row}: probability {d[bad]!r} outside [0, 1]")
    sums = np.add.reduceat(d, chain.indptr[:-1]) if len(d) else np.zeros(n)
    empty = chain.indptr[1:] == chain.indptr[:-1]
    sums = np.where(empty, 0.0, sums)
    dev = np.abs(sums - 1.0)
    if np.any(dev > ROW_SUM_TOL):
        row = int(np.argmax(dev))
        raise InvalidParameter(f"row {row} sums to {sums[row]!r}, not 1")
    ncomp, _ = connected_components(chain.matrix, directed=True, connection="strong")
    if ncomp != 1:
        raise InvalidParameter(f"chain is not irreducible ({ncomp} strongly connected components)")


# ---------------------------------------------------------------- families


def build_complete(n: int) -> ChainSpec:
    """Simple random walk on the complete graph K_n (no self-loops)."""
    if n < 2:
        raise InvalidParameter(f"complete graph needs n >= 2, got {n}")
    P = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(P, 0.0)
    return ChainSpec.from_matrix(P, family="complete", params={"n": n})


def build_cycle(n: int, directed: bool = False) -> ChainSpec:
    if n < 3:
        raise InvalidParameter(f"cycle needs n >= 3, got {n}")
    i = np.arange(n)
    if directed:
        M = sp.coo_matrix((np.ones(n), (i, (i + 1) % n)), shape=(n, n))
        return ChainSpec.from_matrix(M, family="directed-cycle", params={"n": n})
    rows = np.concatenate([i, i])
    cols = np.concatenate([(i + 1) % n, (i - 1) % n])
    M = sp.coo_matrix((np.full(2 * n, 0.5), (rows, cols)), shape=(n, n))
    return ChainSpec.from_matrix(M, family="cycle", params={"n": n})


def hypercube_rates(d: int, eps: float | None = None) -> np.ndarray:
    """Per-coordinate flip probabilities q_1..q_d (summing to one).

    Uniform ``1/d`` without ``eps``; otherwise geometric,
    ``q_j = eps**(j-1) * (1 - eps) / (1 - eps**d)``.
    """
    if d < 1:
        raise InvalidParameter(f"hypercube dimension must be >= 1, got {d}")
    if eps is None:
        return np.full(d, 1.0 / d)
    if not (0.0 < eps < 1.0):
        raise InvalidParameter(f"eps must lie in (0, 1), got {eps}")
    j = np.arange(d)
    return eps**j * (1.0 - eps) / (1.0 - eps**d)


def build_hypercube(d: int, eps: float | None = None) -> ChainSpec:
    """Walk on {0,1}^d; coordinate j (bit j-1 of the state index) flips with prob q_j."""
    q = hypercube_rates(d, eps)
    n = 1 << d
    u = np.arange(n)
    rows = np.repeat(u, d)
    cols = (u[:, None] ^ (1 << np.arange(d))[None, :]).ravel()
    vals = np.tile(q, n)
    M = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    labels = tuple(format(x, f"0{d}b")[::-1] for x in range(n))
    params: dict[str, Any] = {"d": d}
    if eps is not None:
        params["eps"] = float(eps)
    return ChainSpec.from_matrix(M, labels=labels, family="hypercube", params=params)


@dataclass(frozen=True)
class TrapGraphLayout:
    hub: int
    down: tuple[int, ...]
    up: tuple[int, ...]
    clique_of: dict[int, int]
    contacts: tuple[int, ...]
    k: int
    c_param: float


def trap_clique_size(n: int, c_param: float) -> int:
    return math.ceil(math.sqrt(c_param * n) - 1e-12)


def build_trap_graph(n: int, c_param: float) -> tuple[ChainSpec, TrapGraphLayout]:
    """Walk on K_{n+1} plus n disjoint K_k cliques, each joined to one hub by one edge.

    Vertex 0 is the hub, ``1..n`` the rest of the big clique, and clique ``c``
    occupies ``n+1+c*k .. n+(c+1)*k`` with its first vertex as contact.
    """
    if n < 2:
        raise InvalidParameter(f"trap graph needs n >= 2, got {n}")
    if not c_param > 0:
        raise InvalidParameter(f"C must be positive, got {c_param}")
    k = trap_clique_size(n, c_param)
    if k < 2:
        raise InvalidParameter(f"clique size k = ceil(sqrt(C*n)) = {k} < 2")
    N = n + 1 + n * k
    edges_u: list[np.ndarray] = []
    edges_v: list[np.ndarray] = []

    def add_clique(vs: np.ndarray):
        a, b = np.triu_indices(len(vs), 1)
        edges_u.append(vs[a])
        edges_v.append(vs[b])

    add_clique(np.arange(n + 1))
    contacts = []
    for c in range(n):
        vs = np.arange(n + 1 + c * k, n + 1 + (c + 1) * k)
        add_clique(vs)
        contacts.append(int(vs[0]))
    edges_u.append(np.zeros(n, dtype=int))
    edges_v.append(np.array(contacts))
    eu = np.concatenate(edges_u)
    ev = np.concatenate(edges_v)
    A = sp.coo_matrix((np.ones(2 * len(eu)), (np.r_[eu, ev], np.r_[ev, eu])), shape=(N, N)).tocsr()
    deg = np.asarray(A.sum(axis=1)).ravel()
    P = sp.diags(1.0 / deg) @ A
    chain = ChainSpec.from_matrix(P, family="trap", params={"n": n, "c": float(c_param), "k": k})
    up = tuple(range(n + 1, N))
    layout = TrapGraphLayout(
        hub=0,
        down=tuple(range(n + 1)),
        up=up,
        clique_of={u: (u - n - 1) // k for u in up},
        contacts=tuple(contacts),
        k=k,
        c_param=float(c_param),
    )
    return chain, layout


def build_path(n: int) -> ChainSpec:
    """Simple random walk on a path with n vertices (custom, not transitive)."""
    if n < 2:
        raise InvalidParameter(f"path needs n >= 2, got {n}")
    i = np.arange(n - 1)
    A = sp.coo_matrix((np.ones(2 * (n - 1)), (np.r_[i, i + 1], np.r_[i + 1, i])), shape=(n, n)).tocsr()
    deg = np.asarray(A.sum(axis=1)).ravel()
    return ChainSpec.from_matrix(sp.diags(1.0 / deg) @ A, family="custom", params={"graph": "path", "n": n})


# ------------------------------------------------------------- structure


def stationary(chain: ChainSpec) -> np.ndarray:
    """Unique stationary distribution, via a sparse solve with one normalization row."""
    n = chain.n
    A = (chain.matrix.T - sp.identity(n, format="csr")).tolil()
    A[0, :] = np.ones(n)
    b = np.zeros(n)
    b[0] = 1.0
    with np.errstate(all="ignore"):
        pi = spsolve(A.tocsc(), b)
    if not np.all(np.isfinite(pi)):
        raise SolverFailure("stationary solve returned non-finite values")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    resid = np.max(np.abs(chain.matrix.T @ pi - pi))
    if resid > STATIONARY_TOL:
        raise SolverFailure(f"stationary residual {resid:.3e} exceeds {STATIONARY_TOL}")
    return pi


@dataclass(frozen=True)
class ReversibilityReport:
    reversible: bool
    residual: float
    row_residual: float
    tol: float


def check_reversible(chain: ChainSpec, tol: float = REVERSIBLE_TOL, pi=None) -> ReversibilityReport:
    """Detailed-balance residuals.

    ``residual`` is ``max |pi(x)P(x,y) - pi(y)P(y,x)|``; ``row_residual`` is the
    largest per-row sum of those imbalances.
    """
    if pi is None:
        pi = stationary(chain)
    F = sp.diags(pi) @ chain.matrix
    D = abs(F - F.T).tocsr()
    residual = float(D.max()) if D.nnz else 0.0
    row_residual = float(np.asarray(D.sum(axis=1)).max()) if D.nnz else 0.0
    return ReversibilityReport(residual <= tol, residual, row_residual, tol)


def is_reversible(chain: ChainSpec, tol: float = REVERSIBLE_TOL) -> bool:
    return check_reversible(chain, tol).reversible


@dataclass(frozen=True)
class SpeedTriple:
    """Jump rates of the three walkers X, Y, Z. Speed 0 freezes a walker."""

    lambda_x: float = 1.0
    lambda_y: float = 1.0
    lambda_z: float = 0.0

    def __post_init__(self):
        vals = (self.lambda_x, self.lambda_y, self.lambda_z)
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise InvalidParameter(f"speeds must be finite and nonnegative, got {vals}")
        if max(vals) <= 0:
            raise InvalidParameter("at least one speed must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.lambda_x, self.lambda_y, self.lambda_z], dtype=float)

    @property
    def total(self) -> float:
        return self.lambda_x + self.lambda_y + self.lambda_z

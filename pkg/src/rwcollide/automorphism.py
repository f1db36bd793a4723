"""Vertex-transitivity of a weighted transition matrix by backtracking search.

The search individualizes a source state on one side and a target state on
the other, refines both colorings in lockstep by transition-weight profiles,
and branches on the first smallest non-singleton cell. Leaves are checked
entrywise, so a returned map is always a genuine automorphism.
"""
from __future__ import annotations

import weakref
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec

DEFAULT_BUDGET = 10**7
_WEIGHT_SCALE = 1e12


class _BudgetExhausted(Exception):
    pass


@dataclass
class TransitivityReport:
    verdict: str  # "transitive" | "not-transitive" | "unknown"
    witness: tuple[int, int] | None = None
    automorphisms: dict[int, np.ndarray] = field(default_factory=dict)
    expansions: int = 0

    @property
    def transitive(self) -> bool:
        return self.verdict == "transitive"


class _Search:
    def __init__(self, chain: ChainSpec, budget: int):
        self.chain = chain
        self.n = chain.n
        self.budget = budget
        self.expansions = 0
        w = np.rint(chain.data * _WEIGHT_SCALE).astype(np.int64)
        self.out = [[] for _ in range(self.n)]
        self.inn = [[] for _ in range(self.n)]
        for x in range(self.n):
            for k in range(chain.indptr[x], chain.indptr[x + 1]):
                y = int(chain.indices[k])
                self.out[x].append((int(w[k]), y))
                self.inn[y].append((int(w[k]), x))
        self.entries = {(x, y): p for x, y, p in chain.triples()}

    def _signatures(self, colors):
        out, inn = self.out, self.inn
        return [
            (
                colors[v],
                tuple(sorted((p, colors[w]) for p, w in out[v])),
                tuple(sorted((p, colors[w]) for p, w in inn[v])),
            )
            for v in range(self.n)
        ]

    def refine(self, ca, cb):
        """Lockstep equitable refinement; None when the two sides become incompatible."""
        ncolors = len(set(ca))
        while True:
            sa = self._signatures(ca)
            sb = self._signatures(cb)
            if Counter(sa) != Counter(sb):
                return None
            rank = {s: i for i, s in enumerate(sorted(set(sa)))}
            ca = [rank[s] for s in sa]
            cb = [rank[s] for s in sb]
            k = len(rank)
            if k == ncolors:
                return ca, cb
            ncolors = k

    def verify(self, phi) -> bool:
        ent = self.entries
        for (x, y), p in ent.items():
            q = ent.get((phi[x], phi[y]))
            if q is None or abs(q - p) > 1e-12:
                return False
        return True

    def search(self, ca, cb):
        self.expansions += 1
        if self.expansions > self.budget:
            raise _BudgetExhausted
        refined = self.refine(ca, cb)
        if refined is None:
            return None
        ca, cb = refined
        cells_a: dict[int, list[int]] = {}
        cells_b: dict[int, list[int]] = {}
        for v, c in enumerate(ca):
            cells_a.setdefault(c, []).append(v)
        for v, c in enumerate(cb):
            cells_b.setdefault(c, []).append(v)
        # cheap guess first: pair each cell's members in index order
        phi = np.empty(self.n, dtype=np.int64)
        for c, members in cells_a.items():
            phi[members] = cells_b[c]
        if self.verify(phi):
            return phi
        if len(cells_a) == self.n:
            return None
        c = min((c for c in cells_a if len(cells_a[c]) > 1), key=lambda c: (len(cells_a[c]), c))
        v = cells_a[c][0]
        fresh = len(cells_a)
        for w in cells_b[c]:
            na = list(ca)
            nb = list(cb)
            na[v] = fresh
            nb[w] = fresh
            phi = self.search(na, nb)
            if phi is not None:
                return phi
        return None

    def find(self, src: int, dst: int):
        ca = [0] * self.n
        cb = [0] * self.n
        ca[src] = 1
        cb[dst] = 1
        return self.search(ca, cb)


def find_automorphism(chain: ChainSpec, src: int, dst: int, budget: int = DEFAULT_BUDGET):
    """Automorphism mapping ``src`` to ``dst`` as an index array, or None if none exists.

    Raises RuntimeError when the node budget runs out.
    """
    s = _Search(chain, budget)
    try:
        return s.find(src, dst)
    except _BudgetExhausted:
        raise RuntimeError(f"automorphism search exceeded budget of {budget} expansions") from None


_CACHE: "weakref.WeakKeyDictionary[ChainSpec, dict]" = weakref.WeakKeyDictionary()


def check_transitive(chain: ChainSpec, budget: int = DEFAULT_BUDGET) -> TransitivityReport:
    """Look for an automorphism carrying state 0 to every other state.

    Found maps are composed to cover further targets before new searches are
    launched; every stored map is re-verified by substitution at the end.
    Reports are memoized per chain object (chains are immutable).
    """
    per_chain = _CACHE.setdefault(chain, {})
    if budget not in per_chain:
        per_chain[budget] = _check_transitive(chain, budget)
    return per_chain[budget]


def _check_transitive(chain: ChainSpec, budget: int) -> TransitivityReport:
    n = chain.n
    s = _Search(chain, budget)
    found: dict[int, np.ndarray] = {0: np.arange(n, dtype=np.int64)}
    gens: list[np.ndarray] = []

    def close():
        queue = deque(found.items())
        while queue:
            _, psi = queue.popleft()
            for g in gens:
                comp = g[psi]
                y = int(comp[0])
                if y not in found:
                    found[y] = comp
                    queue.append((y, comp))

    try:
        for y in range(1, n):
            if y in found:
                continue
            phi = s.find(0, y)
            if phi is None:
                return TransitivityReport("not-transitive", witness=(0, y), expansions=s.expansions)
            found[y] = phi
            gens.append(phi)
            close()
    except _BudgetExhausted:
        return TransitivityReport("unknown", automorphisms=found, expansions=s.expansions)
    for y, phi in found.items():
        if int(phi[0]) != y or sorted(phi.tolist()) != list(range(n)) or not s.verify(phi):
            raise AssertionError(f"stored map for target {y} failed re-verification")
    return TransitivityReport("transitive", automorphisms=found, expansions=s.expansions)

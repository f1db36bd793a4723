import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwcollide.automorphism import check_transitive, find_automorphism
from rwcollide.chain import ChainSpec, build_complete, build_cycle, build_hypercube, build_path, build_trap_graph


def brute_transitive(P):
    """Oracle: try every permutation."""
    n = len(P)
    reach = {0}
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        if np.allclose(P[np.ix_(p, p)], P, atol=1e-12, rtol=0):
            reach.add(int(p[0]))
    return len(reach) == n


def is_automorphism(P, phi):
    return np.allclose(P[np.ix_(phi, phi)], P, atol=1e-12, rtol=0)


@pytest.mark.parametrize("chain", [build_hypercube(3), build_cycle(6), build_complete(5),
                                   build_cycle(5, directed=True), build_hypercube(3, 0.3)])
def test_known_transitive(chain):
    rep = check_transitive(chain)
    assert rep.transitive
    P = chain.dense()
    for y, phi in rep.automorphisms.items():
        assert phi[0] == y and is_automorphism(P, phi)


@pytest.mark.parametrize("chain", [build_trap_graph(3, 12)[0], build_path(4)])
def test_known_not_transitive(chain):
    rep = check_transitive(chain)
    assert rep.verdict == "not-transitive"
    src, dst = rep.witness
    assert find_automorphism(chain, src, dst) is None


def test_hypercube_translation_found():
    chain = build_hypercube(3)
    phi = find_automorphism(chain, 0, 5)
    assert phi[0] == 5 and is_automorphism(chain.dense(), phi)


def test_budget_exhaustion_reports_unknown():
    rep = check_transitive(build_complete(9), budget=1)
    assert rep.verdict in ("unknown", "transitive")
    with pytest.raises(RuntimeError, match="budget"):
        find_automorphism(build_path(6), 0, 1, budget=0)


@pytest.mark.parametrize("n", [16, 32, 64])
def test_large_transitive_families(n):
    assert check_transitive(build_complete(n)).transitive
    assert check_transitive(build_cycle(n)).transitive


def test_hypercube_64():
    assert check_transitive(build_hypercube(6)).transitive


@st.composite
def small_chains(draw):
    n = draw(st.integers(2, 6))
    kind = draw(st.sampled_from(["circulant", "graph", "weighted"]))
    rng = np.random.default_rng(draw(st.integers(0, 2**31 - 1)))
    if kind == "circulant":
        w = rng.integers(0, 3, size=n).astype(float)
        w[1 % n] += 1
        P = np.array([np.roll(w, i) for i in range(n)])
    elif kind == "graph":
        A = np.triu(rng.random((n, n)) < 0.5, 1).astype(float)
        A[np.arange(n - 1), np.arange(1, n)] = 1
        P = A + A.T
    else:
        P = rng.integers(0, 3, size=(n, n)).astype(float)
        P[np.arange(n), (np.arange(n) + 1) % n] += 1
    P = P / P.sum(axis=1, keepdims=True)
    perm = rng.permutation(n)
    return P[np.ix_(perm, perm)]


@settings(max_examples=120, deadline=None)
@given(small_chains())
def test_matches_brute_force(P):
    chain = ChainSpec.from_matrix(P)
    rep = check_transitive(chain)
    assert rep.verdict != "unknown"
    assert rep.transitive == brute_transitive(chain.dense())

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwcollide.chain import ChainSpec, build_complete, build_cycle, build_hypercube, stationary
from rwcollide.errors import HypothesisViolation
from rwcollide.hitting import hitting_cdf
from rwcollide.spectral import negative_set, spectral_summary

from .conftest import random_reversible


def test_complete_three():
    s = spectral_summary(build_complete(3))
    assert np.allclose(s.eigenvalues, [1, -0.5, -0.5])
    assert s.lambda_star == pytest.approx(0.5) and s.lambda_2 == pytest.approx(-0.5)
    assert s.t_rel_abs == pytest.approx(2.0) and s.t_rel_cont == pytest.approx(2 / 3)


def test_cycle_four_and_square():
    s = spectral_summary(build_cycle(4))
    assert np.allclose(s.eigenvalues, [1, 0, 0, -1], atol=1e-12)
    assert s.lambda_star == pytest.approx(1.0)
    assert s.t_rel_abs == np.inf and s.t_rel_cont == pytest.approx(1.0)
    assert np.allclose(spectral_summary(build_hypercube(2)).eigenvalues, s.eigenvalues, atol=1e-12)


@pytest.mark.parametrize("n", [5, 8, 13])
def test_cycle_cosines(n):
    expect = np.sort(np.cos(2 * np.pi * np.arange(n) / n))[::-1]
    assert np.allclose(spectral_summary(build_cycle(n)).eigenvalues, expect, atol=1e-12)


def test_nonreversible_rejected():
    with pytest.raises(HypothesisViolation):
        spectral_summary(build_cycle(5, directed=True))
    with pytest.raises(HypothesisViolation):
        negative_set(build_cycle(5, directed=True))


def test_negative_set_two_states():
    ns = negative_set(build_complete(2))
    assert len(ns.set_a) == 1 and ns.pi_a == pytest.approx(0.5)
    assert abs(ns.phi[0]) == pytest.approx(abs(ns.phi[1]))
    assert ns.phi[0] * ns.phi[1] < 0


def test_negative_set_tail(c5):
    ns = negative_set(c5)
    s = spectral_summary(c5)
    t = np.linspace(0, 5 * s.t_rel_cont, 30)
    surv = 1 - hitting_cdf(c5, ns.anchor, ns.set_a, 1.0, t).values
    assert np.all(surv >= np.exp(-t / s.t_rel_cont) - 1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**31 - 1))
def test_negative_set_properties(n, seed):
    chain = ChainSpec.from_matrix(random_reversible(np.random.default_rng(seed), n))
    ns = negative_set(chain)
    pi = stationary(chain)
    assert ns.pi_a >= 0.5 - 1e-12
    assert ns.eigen_residual <= 1e-9
    assert np.abs(ns.phi).max() == pytest.approx(1.0) and ns.phi[ns.anchor] == ns.phi.max() > 0
    assert abs(pi @ ns.phi) <= 1e-9  # orthogonal to constants in L2(pi)
    s = spectral_summary(chain)
    assert s.eigenvalues[0] == 1.0 and np.all(np.diff(s.eigenvalues) <= 1e-15)
    assert s.lambda_star >= abs(s.lambda_2) - 1e-15

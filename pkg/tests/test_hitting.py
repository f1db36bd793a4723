import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwcollide.chain import ChainSpec, build_complete, build_cycle, build_hypercube, build_path, stationary
from rwcollide.errors import HypothesisViolation, InvalidParameter
from rwcollide.hitting import (
    aldous_brown_curve,
    expected_hitting_column,
    hitting_cdf,
    hitting_moments,
    killed_spectrum,
    small_time_profile,
)
from rwcollide.spectral import spectral_summary

from .conftest import random_reversible


@pytest.mark.parametrize("n", [2, 3, 7, 12])
def test_complete_expectations(n):
    f = hitting_moments(build_complete(n)).expectations
    off = ~np.eye(n, dtype=bool)
    assert np.allclose(f[off], n - 1) and np.all(np.diag(f) == 0)


@pytest.mark.parametrize("n", [3, 6, 11])
def test_cycle_gamblers_ruin(n):
    f = hitting_moments(build_cycle(n)).expectations
    d = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    d = np.minimum(d, n - d)
    assert np.allclose(f, d * (n - d))


def test_complete_three_star():
    hs = hitting_moments(build_complete(3))
    assert hs.t_star_hit == pytest.approx(4 / 3)
    assert hs.t_hit == pytest.approx(2.0)


def test_cdf_closed_forms():
    t = np.linspace(0, 6, 25)
    assert np.allclose(hitting_cdf(build_complete(2), 0, 1, 1.0, t).values, 1 - np.exp(-t), atol=1e-10)
    for n in (3, 5, 9):
        c = hitting_cdf(build_complete(n), 0, 2, 1.0, t)
        assert np.allclose(c.values, 1 - np.exp(-t / (n - 1)), atol=1e-10)
        assert c.err_bound <= 1e-10
    assert np.all(hitting_cdf(build_cycle(5), 3, 3, 1.0, t).values == 1.0)


def test_cdf_speed_scaling(q3):
    t = np.linspace(0, 5, 11)
    a = hitting_cdf(q3, 0, 7, 2.5, t).values
    b = hitting_cdf(q3, 0, 7, 1.0, 2.5 * t).values
    assert np.allclose(a, b, atol=2e-10)
    with pytest.raises(InvalidParameter):
        hitting_cdf(q3, 0, 7, 0.0, t)


def _rk4_cdf(P, x, z, T, steps):
    """Forward equation of the killed chain, fixed-step RK4."""
    n = len(P)
    rest = [v for v in range(n) if v != z]
    Q = P[np.ix_(rest, rest)] - np.eye(n - 1)
    u = np.zeros(n - 1)
    u[rest.index(x)] = 1.0
    h = T / steps
    for _ in range(steps):
        k1 = u @ Q
        k2 = (u + h / 2 * k1) @ Q
        k3 = (u + h / 2 * k2) @ Q
        k4 = (u + h * k3) @ Q
        u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return 1 - u.sum()


@pytest.mark.parametrize("chain, x, z", [(build_path(5), 0, 4), (build_cycle(7), 0, 3), (build_hypercube(3, 0.3), 0, 7)])
def test_ode_refinement(chain, x, z):
    T = 4.0
    exact = hitting_cdf(chain, x, z, 1.0, [T], tol=1e-13).values[0]
    errs = [abs(_rk4_cdf(chain.dense(), x, z, T, s) - exact) for s in (10, 20, 40, 80)]
    assert errs[-1] <= 1e-8
    # fourth-order convergence towards the uniformization value
    ratios = [a / b for a, b in zip(errs, errs[1:]) if b > 1e-14]
    assert all(r > 10 for r in ratios)


def test_killed_spectrum_complete():
    for n in (3, 5, 8):
        ks = killed_spectrum(build_complete(n), 0)
        assert len(ks.gammas) == 1
        assert ks.gammas[0] == pytest.approx(1 / (n - 1)) and ks.weights[0] == pytest.approx(1.0)
        assert ks.expected_from_alpha == pytest.approx(1 / ks.gammas[0])


def test_killed_spectrum_cycle5():
    for z in range(5):
        ks = killed_spectrum(build_cycle(5), z)
        assert len(ks.gammas) == 2 and np.all(ks.gammas > 0)
        assert ks.expected_from_alpha == pytest.approx(1 / ks.gammas[0])


def test_killed_spectrum_nonreversible():
    with pytest.raises(HypothesisViolation):
        killed_spectrum(build_cycle(5, directed=True), 0)


def test_aldous_brown_complete():
    c = aldous_brown_curve(build_complete(5), 0, np.linspace(0.1, 20, 30))
    assert np.allclose(c.values, 4.0)


def test_aldous_brown_cycle6():
    chain = build_cycle(6)
    ts = hitting_moments(chain).t_star_hit
    c = aldous_brown_curve(chain, 0, np.linspace(0, 10 * ts, 200))
    assert np.all(np.diff(c.values) >= -1e-9 * c.values[:-1])
    assert c.values[0] >= c.expected_from_pi
    assert c.values.max() <= c.bound + 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 8), st.integers(0, 2**31 - 1))
def test_aldous_brown_random(n, seed):
    chain = ChainSpec.from_matrix(random_reversible(np.random.default_rng(seed), n))
    z = seed % n
    c = aldous_brown_curve(chain, z, np.linspace(0, 50, 60))
    assert np.all(np.diff(c.values) >= -1e-9 * c.values[:-1])
    assert c.values.max() <= c.bound + 1e-8
    # f(0) is the conditional mean: E_pi[tau_z] / (1 - pi(z))
    assert c.values[0] == pytest.approx(c.expected_from_pi / (1 - stationary(chain)[z]), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_hitting_properties(n, seed):
    chain = ChainSpec.from_matrix(random_reversible(np.random.default_rng(seed), n))
    hs = hitting_moments(chain)
    P = chain.dense()
    f = hs.expectations
    # generator identity off the diagonal
    resid = (P @ f - f)[~np.eye(n, dtype=bool)] + 1
    assert np.max(np.abs(resid)) <= 1e-10
    assert hs.t_hit <= 2 * hs.t_star_hit + 1e-9
    # random target identity: E_pi[tau_z] summed against pi(z) is independent of the start
    k = f @ hs.pi
    assert np.allclose(k, k[0])
    assert np.allclose(expected_hitting_column(chain, 0), f[:, 0])


def test_small_time_profiles():
    p = small_time_profile(build_complete(4), 0, 1e-4)
    assert p.lhs[0] <= 0.06
    q = small_time_profile(build_hypercube(3), 0, [0.01, 0.04, 0.09, 1.0])
    assert np.all(q.lhs <= q.bound)
    assert q.pi_a >= 0.5
    with pytest.raises(HypothesisViolation):
        small_time_profile(build_path(4), 0, 0.01)
    with pytest.raises(InvalidParameter):
        small_time_profile(build_complete(4), 0, 0.0)


def test_t_rel_vs_limit(c5):
    # 1/gamma_1 never exceeds the conditional-mean bound
    c = aldous_brown_curve(c5, 0, [0.0])
    assert c.limit <= c.bound
    assert c.t_rel_cont == pytest.approx(spectral_summary(c5).t_rel_cont)

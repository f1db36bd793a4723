import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from rwcollide.uniformization import transient_survival


def _expm_survival(K, rate, times, start):
    Q = rate * (K - np.eye(len(K)))
    return np.array([start @ scipy.linalg.expm(Q * t) @ np.ones(len(K)) for t in times])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.floats(0.1, 5.0), st.integers(0, 2**31 - 1))
def test_against_expm(m, rate, seed):
    rng = np.random.default_rng(seed)
    K = rng.random((m, m))
    K = K / K.sum(axis=1, keepdims=True) * rng.uniform(0.3, 0.99, size=(m, 1))
    start = rng.dirichlet(np.ones(m))
    times = np.array([0.0, 0.1, 1.0, 3.0, 10.0])
    res = transient_survival(K, rate, times, start=start, tol=1e-12)
    ref = _expm_survival(K, rate, times, start)
    assert res.err_bound <= 1e-12
    assert np.max(np.abs(res.values - ref)) <= 1e-11


def test_all_starts_matrix_shape():
    K = np.array([[0.0, 0.5], [0.25, 0.25]])
    times = np.linspace(0, 4, 9)
    res = transient_survival(K, 2.0, times)
    assert res.values.shape == (9, 2)
    for i in range(2):
        e = np.eye(2)[i]
        assert np.allclose(res.values[:, i], _expm_survival(K, 2.0, times, e), atol=1e-10)


def test_pure_death_clock():
    # single state killed at rate 1: survival exp(-t)
    t = np.linspace(0, 20, 41)
    res = transient_survival(np.zeros((1, 1)), 1.0, t, start=np.ones(1))
    assert np.allclose(res.values, np.exp(-t), atol=1e-10)


def test_time_zero_and_negative():
    res = transient_survival(np.eye(2) * 0.5, 1.0, [0.0], start=np.array([0.3, 0.2]))
    assert res.values[0] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        transient_survival(np.eye(2) * 0.5, 1.0, [-1.0])

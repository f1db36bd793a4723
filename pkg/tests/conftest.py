import numpy as np
import pytest

from rwcollide.chain import build_complete, build_cycle, build_hypercube, build_path

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def k4():
    return build_complete(4)


@pytest.fixture
def c5():
    return build_cycle(5)


@pytest.fixture
def q3():
    return build_hypercube(3)


@pytest.fixture
def path4():
    return build_path(4)


def random_reversible(rng, n, density=0.6, loops=True):
    """Random connected reversible chain: P = W / rowsum(W) for symmetric W >= 0."""
    W = rng.random((n, n)) * (rng.random((n, n)) < density)
    W = np.triu(W, 1)
    W = W + W.T
    idx = np.arange(n - 1)
    W[idx, idx + 1] += 0.1  # keep a spanning path
    W[idx + 1, idx] += 0.1
    if loops:
        W[np.diag_indices(n)] = rng.random(n) * 0.5
    return W / W.sum(axis=1, keepdims=True)

import numpy as np
import pytest
from hypothesis import strategies as st

from fracph import PHDist, load_model


def random_ph(rng, p, deficit=0.0, sparse=0.3):
    """Random valid PH(pi, T): every state exits at a positive rate."""
    off = rng.exponential(size=(p, p)) * (rng.random((p, p)) > sparse)
    np.fill_diagonal(off, 0.0)
    exit_ = rng.uniform(0.2, 2.0, size=p)
    T = off - np.diag(off.sum(axis=1) + exit_)
    pi = rng.dirichlet(np.ones(p)) * (1.0 - deficit)
    return PHDist(pi, T)


@st.composite
def ph_models(draw, p=None, max_p=4, allow_deficit=True):
    seed = draw(st.integers(0, 2**32 - 1))
    p = draw(st.integers(1, max_p)) if p is None else p
    deficit = draw(st.sampled_from([0.0, 0.0, 0.25])) if allow_deficit else 0.0
    return random_ph(np.random.default_rng(seed), p, deficit)


@pytest.fixture(scope="session")
def fig3():
    return load_model("preset:paper-fig3").dist


@pytest.fixture
def erlang2():
    return PHDist([1.0, 0.0], [[-1.0, 1.0], [0.0, -1.0]])


_ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record one acceptance line; all lines are repeated in the terminal summary."""

    def record(number, passed, text):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

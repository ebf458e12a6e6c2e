"""Shared helpers: random points of the open admissible region and a strategy for them."""

import numpy as np
import pytest
from hypothesis import strategies as st


def random_generic_m(rng: np.random.Generator, nplus1: int, margin: float = 0.02, scale: float = 0.5) -> np.ndarray:
    """Anti-symmetric ``m`` with every cyclic gap ``m_(i-1) - m_i > -1 + margin``."""
    d = nplus1 // 2
    while True:
        head = rng.uniform(-scale, scale, d)
        m = np.zeros(nplus1)
        m[:d] = head
        m[nplus1 - d :] = -head[::-1]
        gaps = np.roll(m, 1) - m
        if np.all(gaps > -1.0 + margin):
            return m


@st.composite
def generic_m(draw, nplus1: int, margin: float = 0.02):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_generic_m(np.random.default_rng(seed), nplus1, margin)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from latticeloop.loops import Loop
from latticeloop.suites import window_instances, window_loops

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def closed_walks(draw, dim=2, max_half=5):
    """Random walk closed by an axis-by-axis return path; may contain backtracks."""
    steps = draw(st.lists(st.sampled_from([s * a for a in range(1, dim + 1) for s in (1, -1)]), min_size=1, max_size=max_half))
    disp = [0] * dim
    for s in steps:
        disp[abs(s) - 1] += 1 if s > 0 else -1
    back = []
    order = draw(st.permutations(range(dim)))
    for a in order:
        back += [(-1 if disp[a] > 0 else 1) * (a + 1)] * abs(disp[a])
    base = tuple(draw(st.integers(-3, 3)) for _ in range(dim))
    return Loop(base, tuple(steps) + tuple(back))


@st.composite
def window_loop(draw, max_len=8):
    """A backtrack-free window loop, randomly rotated and translated."""
    pool = [l for l in window_loops(4, max_len, 2)]
    loop = draw(st.sampled_from(pool))
    shift = (draw(st.integers(-4, 4)), draw(st.integers(-4, 4)))
    return loop.rotate(draw(st.integers(0, len(loop) - 1))).translate(shift)


@pytest.fixture(scope="session")
def small_instances():
    return list(window_instances(4, 6, 2, 2))


@pytest.fixture
def rng():
    return random.Random(1234)

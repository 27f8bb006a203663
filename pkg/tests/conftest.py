import numpy as np
import pytest
from hypothesis import strategies as st

from algdyn.group_ring import GroupRingElement
from algdyn.polyio import parse_expression

ACCEPTANCE_LINES = []

CAT = "u^2 - u - 1"
HARMONIC3 = "6 - u1 - u1^-1 - u2 - u2^-1 - u3 - u3^-1"


def P(text, dim=None):
    return parse_expression(text, dim)


def elements(dim, radius=2, coef=3, max_terms=6):
    """Hypothesis strategy for small integral group-ring elements."""
    mono = st.tuples(*[st.integers(-radius, radius)] * dim)
    return st.dictionaries(mono, st.integers(-coef, coef), max_size=max_terms).map(
        lambda t: GroupRingElement(dim, t)
    )


def nonzero_elements(dim, **kw):
    return elements(dim, **kw).filter(lambda f: not f.is_zero())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

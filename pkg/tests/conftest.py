import numpy as np
import pytest
from hypothesis import strategies as st

from lulu_dpt import DOMAIN_ONLY, FACET, FULL, ZERO_PADDED, Lattice, ScalarField


def fld(values, boundary=ZERO_PADDED, connectivity=FACET):
    return ScalarField.from_array(np.array(values, dtype=np.int64), connectivity, boundary)


@pytest.fixture
def make_field():
    return fld


@st.composite
def small_fields(draw, max_cells=12, lo=-3, hi=5, two_d=True):
    """Random fields on 1D or 2D windows of at most ``max_cells`` cells, any mode."""
    boundary = draw(st.sampled_from([ZERO_PADDED, DOMAIN_ONLY]))
    if two_d and draw(st.booleans()):
        rows = draw(st.integers(1, 3))
        cols = draw(st.integers(1, max(1, max_cells // rows)))
        shape = (rows, cols)
        conn = draw(st.sampled_from([FACET, FULL]))
    else:
        shape = (draw(st.integers(1, max_cells)),)
        conn = FACET
    lat = Lattice(shape, conn, boundary)
    vals = draw(st.lists(st.integers(lo, hi), min_size=lat.size, max_size=lat.size))
    return ScalarField(lat, vals)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import strategies as st

from kautz_census.words import GraphParams, enumerate_vertices, format_word, out_neighbors

ACCEPTANCE_LINES: list[str] = []


def nx_kautz(d: int, m: int) -> nx.DiGraph:
    """Independent construction of K(d, m) from the shift-append rule."""
    G = nx.DiGraph()
    for w in enumerate_vertices(GraphParams(d, m)):
        for v in out_neighbors(w, d):
            G.add_edge(format_word(w), format_word(v))
    return G


@st.composite
def kautz_words(draw, d=None, m=None):
    d = draw(st.integers(2, 4)) if d is None else d
    m = draw(st.integers(1, 9)) if m is None else m
    w = [draw(st.integers(0, d))]
    for _ in range(m - 1):
        nxt = draw(st.integers(0, d - 1))
        w.append(nxt + (nxt >= w[-1]))
    return d, tuple(w)


@pytest.fixture
def acceptance_log():
    def log(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

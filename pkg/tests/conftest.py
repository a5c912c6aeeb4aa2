from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from renewalcode.chain import LabeledMarkovChain  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def three_state():
    """pi = (2/5, 3/10, 3/10); the return time of 0 is 1 + Geom(2/3) shifted."""
    return LabeledMarkovChain.from_matrix(
        [["0", "1/2", "1/2"], ["1/3", "1/3", "1/3"], ["1", "0", "0"]]
    )


def _row(draw, n, support_all=False):
    weights = draw(st.lists(st.integers(0 if not support_all else 1, 5), min_size=n, max_size=n))
    if sum(weights) == 0:
        weights[draw(st.integers(0, n - 1))] = 1
    tot = sum(weights)
    return {j: Fraction(w, tot) for j, w in enumerate(weights) if w}


@st.composite
def irreducible_chains(draw, max_states=6, max_labels=3, injective=False):
    """Random exact chains made irreducible by a forced cycle 0 -> 1 -> ... -> 0."""
    n = draw(st.integers(1, max_states))
    rows = []
    for i in range(n):
        r = _row(draw, n)
        nxt = (i + 1) % n
        if nxt not in r:
            r = {j: p / 2 for j, p in r.items()}
            r[nxt] = r.get(nxt, 0) + Fraction(1, 2)
        rows.append(r)
    if injective:
        labels = list(range(n))
    else:
        labels = [draw(st.sampled_from("abc"[:max_labels])) for _ in range(n)]
    return LabeledMarkovChain(list(range(n)), rows, labels)


def random_chain(rng, max_states=6, labels="abc"):
    """Plain-RNG twin of :func:`irreducible_chains` for seeded loops."""
    n = rng.randint(1, max_states)
    rows = []
    for i in range(n):
        w = [rng.randint(0, 5) for _ in range(n)]
        w[(i + 1) % n] += 1
        tot = sum(w)
        rows.append({j: Fraction(x, tot) for j, x in enumerate(w) if x})
    return LabeledMarkovChain(list(range(n)), rows, [rng.choice(labels) for _ in range(n)])


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

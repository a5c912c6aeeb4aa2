"""Small chains shipped for demonstrations and acceptance runs."""

from __future__ import annotations

from fractions import Fraction

from ..chain import LabeledMarkovChain
from ..renewal import HazardFunction
from ..transforms import SplitDistribution, independent_split
from .hazard import build_hazard_chain

ALTERNATING_HAZARD = (
    Fraction(9, 10),
    Fraction(1, 5),
    Fraction(3, 5),
    Fraction(1, 5),
    Fraction(3, 5),
    Fraction(1, 5),
    Fraction(3, 5),
    Fraction(1, 5),
)
ALTERNATING_TAIL = Fraction(2, 5)


def constant_hazard_chain(p=Fraction(3, 10)) -> LabeledMarkovChain:
    """Markov chain on {s, a, b}: every step goes to s with probability p."""
    p = Fraction(p)
    q = (1 - p) / 2
    row = {"s": p, "a": q, "b": q}
    return LabeledMarkovChain.from_dict({x: dict(row) for x in "sab"})


def hazard_renewal_chain(f: HazardFunction, letters=("a", "b"), s="s") -> LabeledMarkovChain:
    """Renewal process with hazard f; between renewals the letters are IID uniform."""
    view = build_hazard_chain(f).renewal_view(s, "*")
    w = Fraction(1, len(letters))
    return independent_split(view, "*", SplitDistribution(tuple(letters), (w,) * len(letters)))


def alternating_hazard_chain() -> LabeledMarkovChain:
    """Hazard alternating between 1/5 and 3/5 over a window, then constant 2/5."""
    return hazard_renewal_chain(HazardFunction.from_values(ALTERNATING_HAZARD, tail=ALTERNATING_TAIL))


def pair_renewal_chain() -> LabeledMarkovChain:
    """Four-state Markov chain with two renewal states s1, s2 and entropy room."""
    return LabeledMarkovChain.from_dict(
        {
            "s1": {"a": Fraction(1, 2), "b": Fraction(1, 2)},
            "s2": {"s1": Fraction(1, 4), "a": Fraction(1, 4), "b": Fraction(1, 2)},
            "a": {"s1": Fraction(1, 4), "s2": Fraction(1, 4), "a": Fraction(1, 4), "b": Fraction(1, 4)},
            "b": {"s1": Fraction(1, 4), "s2": Fraction(1, 4), "a": Fraction(1, 4), "b": Fraction(1, 4)},
        }
    )

import math
from fractions import Fraction

import pytest
from conftest import irreducible_chains
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import renewal_by_enumeration, return_time_by_matrix

from renewalcode.chain import ChainError, LabeledMarkovChain, stationary_vector
from renewalcode.renewal import (
    GEOMETRIC,
    NONE,
    RESIDUAL,
    HazardFunction,
    ReturnTimeDistribution,
    hazard_from_pmf,
    pmf_from_hazard,
    renewal_word_probability,
    return_time_distribution,
    verify_renewal_state,
)
from renewalcode.report import Status


def test_geometric_law():
    T = ReturnTimeDistribution.geometric(Fraction(1, 4))
    assert T.K == 0 and T.tail == GEOMETRIC
    assert T.pmf_upto(3) == [Fraction(1, 4), Fraction(3, 16), Fraction(9, 64)]
    assert T.survival(2) == Fraction(9, 16)
    assert T.mean() == 4


def test_entropy_of_geometric_matches_series():
    T = ReturnTimeDistribution.geometric(Fraction(1, 3))
    series = -sum(float(p) * math.log(float(p)) for p in T.pmf_upto(400))
    assert T.entropy() == pytest.approx(series, abs=1e-12)


def test_from_values_folds_into_canonical_form():
    # p(1) = 1/2 already follows the hazard 1/2 of the tail
    T = ReturnTimeDistribution.from_values(["1/2"], tail=GEOMETRIC, tail_hazard="1/2")
    assert T.K == 0
    with pytest.raises(ValueError):
        ReturnTimeDistribution((Fraction(1, 2),))


def test_point_mass():
    T = ReturnTimeDistribution.point_mass(3)
    assert T.pmf_upto(4) == [0, 0, 1, 0]
    assert T.mean() == 3


def test_residual_tail_refuses_beyond_horizon():
    T = ReturnTimeDistribution((Fraction(1, 2),), RESIDUAL, Fraction(1, 2))
    with pytest.raises(ValueError):
        T.prob(2)
    with pytest.raises(ValueError):
        T.mean()


def test_three_state_return_time(three_state):
    T = return_time_distribution(three_state, 0)
    assert T.tail == GEOMETRIC
    assert T.prob(1) == 0
    assert hazard_from_pmf(T).tail == Fraction(2, 3)
    assert T.mean() == Fraction(5, 2)  # Kac: 1 / P(0)
    assert T.pmf_upto(30) == return_time_by_matrix(three_state, stationary_vector(three_state), 0, 30)


def test_return_time_bounded_cycle():
    c = LabeledMarkovChain.from_dict({"a": {"b": "1"}, "b": {"c": "1"}, "c": {"a": "1"}})
    T = return_time_distribution(c, "a")
    assert T.tail == NONE and T.pmf == (0, 0, 1)


@settings(max_examples=60, deadline=None)
@given(irreducible_chains(max_states=5), st.data())
def test_return_time_matches_matrix_oracle(chain, data):
    s = data.draw(st.sampled_from(chain.alphabet))
    T = return_time_distribution(chain, s, horizon=60)
    want = return_time_by_matrix(chain, stationary_vector(chain), s, 20)
    assert T.pmf_upto(20) == want
    if T.tail != RESIDUAL:
        assert T.mean() == 1 / renewal_word_probability(chain, s)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20), max_size=6),
    st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20),
)
def test_hazard_pmf_roundtrip(values, tail):
    f = HazardFunction(tuple(values), tail)
    T = pmf_from_hazard(f)
    g = hazard_from_pmf(T)
    assert all(g(k) == f(k) for k in range(1, len(values) + 5))
    assert sum(T.pmf_upto(len(values))) + T.survival(len(values)) == 1


def test_bounded_hazard():
    f = HazardFunction.from_values(["1/2", "1"])
    T = pmf_from_hazard(f)
    assert T.pmf == (Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(ValueError):
        HazardFunction.from_values(["1", "1/2"])


def test_markov_states_are_renewal(three_state):
    for s in three_state.alphabet:
        assert verify_renewal_state(three_state, s, 3).passed


def _non_renewal_chain():
    # 'a' remembers whether it came from x or from y
    return LabeledMarkovChain.from_dict(
        {
            "x": {"a1": "1/2", "x": "1/2"},
            "a1": {"y": "1"},
            "y": {"a2": "1/2", "y": "1/2"},
            "a2": {"x": "1"},
        },
        labels={"x": "x", "a1": "a", "y": "y", "a2": "a"},
    )


def test_non_renewal_symbol_fails_with_witness():
    rep = verify_renewal_state(_non_renewal_chain(), "a", 1)
    assert rep.status is Status.FAIL
    assert "past" in rep.witness and "future" in rep.witness


def test_renewal_check_float_mode():
    c = LabeledMarkovChain.from_matrix([[0.5, 0.5], [0.25, 0.75]], exact=False)
    assert verify_renewal_state(c, 0, 3).passed


def test_zero_probability_symbol_rejected():
    c = LabeledMarkovChain.from_dict({"t": {"a": "1"}, "a": {"a": "1"}})
    with pytest.raises(ChainError):
        verify_renewal_state(c, "t", 2)


@settings(max_examples=30, deadline=None)
@given(irreducible_chains(max_states=3, max_labels=2), st.data())
def test_renewal_check_agrees_with_enumeration(chain, data):
    s = data.draw(st.sampled_from(chain.alphabet))
    rep = verify_renewal_state(chain, s, 2)
    assert rep.passed == renewal_by_enumeration(chain, stationary_vector(chain), s, 2)

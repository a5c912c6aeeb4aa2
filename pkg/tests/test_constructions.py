from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import renewal_hit_by_tree, stationary_exact

from renewalcode.chain import ChainError, LabeledMarkovChain, stationary_vector
from renewalcode.constructions import (
    AlphaError,
    PipelineError,
    build_hazard_chain,
    build_marker_construction,
    compute_alpha,
    marker_recurrence,
    prop1_pipeline,
    prop2_pipeline,
    split_to_entropy,
    stringing_reduction,
    verify_age_independence,
    verify_marker_independence,
)
from renewalcode.constructions.demos import (
    ALTERNATING_HAZARD,
    ALTERNATING_TAIL,
    alternating_hazard_chain,
    constant_hazard_chain,
    pair_renewal_chain,
)
from renewalcode.constructions.prop2 import _indicator_chain
from renewalcode.entropy import entropy_rate
from renewalcode.renewal import HazardFunction, pmf_from_hazard, return_time_distribution
from renewalcode.tails import NotSemiRegular, SemiRegularParams
from renewalcode.transforms import k_stringing

CONST = HazardFunction.constant(Fraction(3, 10))
ALT = HazardFunction(ALTERNATING_HAZARD, ALTERNATING_TAIL)
EPS = Fraction(1, 8)


@pytest.fixture(scope="module")
def constant_marker():
    return build_marker_construction(constant_hazard_chain(), "s", EPS)


# hazard chain -----------------------------------------------------------------


@pytest.mark.parametrize("f", [CONST, ALT])
def test_hazard_chain_stationary_matches_oracle(f):
    Z = build_hazard_chain(f)
    assert list(Z.stationary) == stationary_exact(Z.chain)


def test_hazard_chain_transitions():
    Z = build_hazard_chain(ALT, lump_K=10)
    for k in range(10):
        assert Z.chain.prob(k, 0) == ALT(k + 1)
        assert Z.chain.prob(k, k + 1) == 1 - ALT(k + 1)
    assert Z.chain.prob(10, 10) == 1 - ALTERNATING_TAIL


def test_hazard_chain_view_has_the_right_return_time():
    view = build_hazard_chain(ALT).renewal_view("s", "*")
    T = return_time_distribution(view, "s")
    assert T.pmf_upto(40) == pmf_from_hazard(ALT).pmf_upto(40)


def test_hazard_chain_lump_below_window_rejected():
    with pytest.raises(ValueError):
        build_hazard_chain(ALT, lump_K=3)


def test_bounded_hazard_chain():
    Z = build_hazard_chain(HazardFunction.from_values(["1/2", "1"]))
    assert Z.lump_K is None and len(Z.chain) == 2


# alpha --------------------------------------------------------------------------


def test_alpha_constant_hazard_k0_one():
    alpha = compute_alpha(build_hazard_chain(CONST), 1, Fraction(3, 10))
    assert set(alpha) == {1}


def test_alpha_constant_hazard_k0_two():
    # P(Z_2 = 0 | Z_0 = k) = f * f + (1 - f) * f = f, so alpha = f^2 / f = f
    Z = build_hazard_chain(CONST, lump_K=3)
    alpha = compute_alpha(Z, 2, Fraction(3, 10))
    assert set(alpha.hit_probs) == {Fraction(3, 10)}
    assert set(alpha) == {Fraction(3, 10)}
    assert renewal_hit_by_tree(CONST, 0, 2) == Fraction(3, 10)


def test_alpha_alternating_against_path_tree():
    Z = build_hazard_chain(ALT)
    alpha = compute_alpha(Z, 2, Fraction(1, 5))
    for k in range(len(alpha)):
        assert alpha.hit_probs[k] == renewal_hit_by_tree(ALT, k, 2)
        assert 0 < alpha[k] <= 1
        assert alpha[k] * alpha.hit_probs[k] == Fraction(1, 25)


def test_alpha_rejects_unusable_pair():
    f = HazardFunction.from_values(["1/100"], tail="1/2")
    with pytest.raises(AlphaError):
        compute_alpha(build_hazard_chain(f), 1, Fraction(1, 2))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10), max_denominator=12), max_size=5),
    st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10), max_denominator=12),
    st.integers(1, 3),
)
def test_alpha_normalization_property(values, tail, k0):
    f = HazardFunction(tuple(values), tail)
    Z = build_hazard_chain(f, max(len(values), k0 + 1, 1))
    const = min(Z.renewal_within(k, k0) for k in Z.ages())
    alpha = compute_alpha(Z, k0, Fraction(1, 2), constant=const)
    assert {a * p for a, p in zip(alpha, alpha.hit_probs)} == {const}
    assert all(0 < a <= 1 for a in alpha)


# marker construction -------------------------------------------------------------


def test_constant_b_probability(constant_marker):
    X, M = constant_marker
    assert M.b_probability == Fraction(21, 640)
    assert M.b_probability <= EPS
    pi = stationary_vector(X)
    assert sum(pi[i] for i in M.b_states(X)) == M.b_probability


def test_constant_marker_independence(constant_marker):
    X, M = constant_marker
    rep = verify_marker_independence(X, M, M.k0 + 40)
    assert rep.passed, rep.to_dict()
    assert verify_age_independence(X, M).passed


def test_marker_needs_geometric_tail():
    cycle = LabeledMarkovChain.from_dict({"s": {"a": "1"}, "a": {"s": "1/2", "a": "1/2"}})
    X, M = build_marker_construction(cycle, "s", EPS)  # geometric: fine
    assert M.k0 >= 1
    periodic = LabeledMarkovChain.from_dict({"s": {"a": "1"}, "a": {"s": "1"}})
    with pytest.raises(NotSemiRegular):
        build_marker_construction(periodic, "s", EPS)


@pytest.mark.parametrize("make", [constant_hazard_chain, alternating_hazard_chain])
def test_lump_size_does_not_change_results(make, monkeypatch):
    monkeypatch.setenv("RENEWALCODE_STATE_CAP", "200000")
    Y = make()
    X1, M1 = build_marker_construction(Y, "s", EPS)
    X2, M2 = build_marker_construction(Y, "s", EPS, lump_K=M1.lump_K + 10)
    assert M1.b_probability == M2.b_probability
    assert [M2.alpha[k] for k in range(len(M1.alpha))] == list(M1.alpha)
    assert all(M2.alpha[k] == M1.alpha[M1.lump_K] for k in range(M1.lump_K, M2.lump_K + 1))
    t = tuple(("a", z) for z in range(1, M1.k0 + 2))
    law1 = return_time_distribution(_indicator_chain(X1, M1, t), 1, 30).pmf_upto(30)
    law2 = return_time_distribution(_indicator_chain(X2, M2, t), 1, 30).pmf_upto(30)
    assert law1 == law2
    assert verify_marker_independence(X2, M2, M2.k0 + 8).passed


def test_explicit_params_are_respected():
    X, M = build_marker_construction(constant_hazard_chain(), "s", EPS, SemiRegularParams(Fraction(3, 10), 2))
    assert M.k0 == 2 and M.marker_word == (0, 0, 1)
    assert verify_marker_independence(X, M, 20).passed


# IID-word characterization -------------------------------------------------------


def _iid_word_chain(word):
    coin = LabeledMarkovChain.from_matrix([["3/4", "1/4"], ["3/4", "1/4"]])
    k = len(word)
    return k_stringing(coin, k).relabel(lambda w: 1 if w == word else "*")


def test_non_overlapping_word_has_marker_recurrence():
    assert marker_recurrence(_iid_word_chain((0, 0, 1)), 1, 2, 20).passed


def test_self_overlapping_word_does_not():
    assert not marker_recurrence(_iid_word_chain((1, 1)), 1, 1, 10).passed


# pipelines -----------------------------------------------------------------------


@pytest.fixture(scope="module")
def constant_prop2():
    return prop2_pipeline(constant_hazard_chain(), "s", [Fraction(1, 4), EPS])


def test_prop2_constant_all_checks_pass(constant_prop2):
    Xpp, W = constant_prop2
    assert W.passed, [r.to_dict() for r in W.checks if not r.passed]
    names = {r.check_name for r in W.checks}
    assert {"forcing", "marker_recurrence", "symbol_2_law", "marker_independence"} <= names
    assert {1, 2} <= set(Xpp.alphabet)


def test_prop2_ledger(constant_prop2):
    _, W = constant_prop2
    ledger = {e.stage: e for e in W.entropy_ledger}
    assert ledger["h(X')"].margin > 0
    assert abs(ledger["h(X'')"].margin) <= 1e-9


def test_prop2_rejects_bad_inputs():
    with pytest.raises(ValueError):
        prop2_pipeline(constant_hazard_chain(), "s", [])
    with pytest.raises(ValueError):
        prop2_pipeline(constant_hazard_chain(), "s", [EPS], a="s")


def test_prop1_pair_chain():
    Y, W = prop1_pipeline(pair_renewal_chain(), "s1", "s2", [Fraction(1, 2), Fraction(1, 10)])
    assert W.passed
    assert abs(entropy_rate(Y).value - entropy_rate(pair_renewal_chain()).value) <= 1e-9
    assert W.artifacts["mu"] == Fraction(1, 2)


LOW_ENTROPY = LabeledMarkovChain.from_dict(
    {
        "s1": {"s2": "1"},
        "s2": {"a": "1"},
        "a": {"a": "1/2", "s1": "49/100", "b": "1/100"},
        "b": {"s1": "1/2", "b": "1/2"},
    }
)


def test_prop1_degenerate_grid_errors():
    with pytest.raises(PipelineError) as err:
        prop1_pipeline(LOW_ENTROPY, "s1", "s2", [Fraction(9, 10)])
    (cand,) = err.value.diagnostics["candidates"]
    assert cand["reason"] == "entropy budget exceeded" and cand["margin"] < 0


def test_prop1_picks_largest_feasible_mu():
    _, W = prop1_pipeline(LOW_ENTROPY, "s1", "s2", [Fraction(9, 10), Fraction(1, 100)])
    assert W.artifacts["mu"] == Fraction(1, 100)
    assert W.passed


def test_prop1_requires_room():
    tight = LabeledMarkovChain.from_dict(
        {"s1": {"s2": "1"}, "s2": {"a": "1"}, "a": {"s1": "99/100", "b": "1/100"}, "b": {"s1": "1"}}
    )
    with pytest.raises(PipelineError, match="stringing_reduction"):
        prop1_pipeline(tight, "s1", "s2", [Fraction(1, 10)])


def test_stringing_reduction_iid():
    coin = LabeledMarkovChain.from_matrix([["1/2", "1/2"], ["1/2", "1/2"]])
    choice = stringing_reduction(coin, 0, 0.2, 8)
    assert choice.k <= 6 and choice.pair_entropy < 0.2
    assert 0 in choice.t1 and 0 in choice.t2


def test_stringing_reduction_generous_budget():
    X = pair_renewal_chain()
    assert stringing_reduction(X, "s1", entropy_rate(X).value + 1, 4).k == 1


def test_stringing_reduction_errors():
    single = LabeledMarkovChain.from_dict({"s": {"s": "1"}})
    with pytest.raises(ChainError, match="two distinct"):
        stringing_reduction(single, "s", 0.5, 3)
    coin = LabeledMarkovChain.from_matrix([["1/2", "1/2"], ["1/2", "1/2"]])
    with pytest.raises(ChainError, match="insufficient"):
        stringing_reduction(coin, 0, 1e-6, 3)


def test_split_to_entropy_hits_target():
    view = build_hazard_chain(ALT).renewal_view("s", "*")
    target = entropy_rate(view).value + 0.3
    out, split = split_to_entropy(view, "*", target)
    assert len(split.weights) >= 2
    assert abs(entropy_rate(out).value - target) <= 1e-9
    with pytest.raises(PipelineError):
        split_to_entropy(view, "*", target - 1)

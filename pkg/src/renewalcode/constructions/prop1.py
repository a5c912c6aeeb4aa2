"""Two renewal states -> a process whose symbol 1 has a geometric-compound return time."""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Sequence

from ..chain import ChainError, LabeledMarkovChain, RenewalResolving, Symbol, minimize, stationary_vector
from ..entropy import EntropyValue, binary_entropy, entropy_rate
from ..renewal import return_time_distribution, verify_renewal_state
from ..report import Status, VerificationReport
from ..tails import TailCertificationError, geometric_compound, regular_tail_certify, support_gcd
from ..transforms import block_factor, k_stringing, product_with_iid_mark
from .common import ENTROPY_MATCH_TOL, PipelineError, PipelineWitness, split_to_entropy, strictly_below
from .prop2 import STAR, same_return_law


def pair_indicator(chain: LabeledMarkovChain, t1, t2) -> LabeledMarkovChain:
    """Labels ``t1``, ``t2`` kept, everything else sent to ``*``; both must be renewal."""
    keep = {t1, t2}
    return minimize(
        chain.relabel(lambda lab: lab if lab in keep else STAR, certificate=RenewalResolving(frozenset(keep)))
    )


def prop1_pipeline(
    X: LabeledMarkovChain,
    s1: Symbol,
    s2: Symbol,
    mu_grid: Sequence,
    depth: int = 3,
    tail_horizon: int = 400,
    law_horizon: int = 100,
    certify_kw: dict | None = None,
) -> tuple[LabeledMarkovChain, PipelineWitness]:
    """Mark ``s1`` by independent Bernoulli(mu) coins and keep ``s2``.

    The output has the entropy of ``X``, renewal symbols 1 and 2, and the
    return time of 1 is the geometric compound of the return time of ``s1``.

    Parameters
    ----------
    X : LabeledMarkovChain
        Certified chain with renewal symbols ``s1`` and ``s2``.
    mu_grid : sequence of Fraction
        Candidate coin rates; the largest feasible one is used. Feasible
        means the compound tail certifies as regular and the marked factor
        has entropy strictly below ``h(X)``.

    Raises
    ------
    PipelineError
        If a precondition fails or no rate in the grid is feasible; the
        diagnostics list every candidate.
    """
    if not mu_grid:
        raise ValueError("empty mu grid")
    if s1 == s2:
        raise ValueError("s1 and s2 must differ")
    W = PipelineWitness()
    for s in (s1, s2):
        rep = W.check(verify_renewal_state(X, s, depth))
        if not rep.passed:
            raise PipelineError(f"{s!r} is not a renewal symbol", {"report": rep.to_dict()})
    h_X = entropy_rate(X)
    Xpair = pair_indicator(X, s1, s2)
    h_pair = entropy_rate(Xpair)
    W.ledger("h(X')", h_pair, h_X, "<")
    if not strictly_below(h_pair, h_X):
        raise PipelineError(
            "pair indicator has no entropy room; pass X through stringing_reduction first",
            {"h(X')": h_pair.value, "h(X)": h_X.value},
        )
    T = return_time_distribution(X, s1, tail_horizon)
    W.step("return_time", symbol=s1, tail=T.tail, K=T.K, gcd=support_gcd(T))

    candidates = []
    chosen = None
    for mu in sorted((Fraction(m) for m in mu_grid), reverse=True):
        entry = {"mu": mu}
        candidates.append(entry)
        q = geometric_compound(T, mu, tail_horizon)
        try:
            fit = regular_tail_certify(q, **(certify_kw or {}))
        except TailCertificationError as exc:
            entry.update(certified=False, reason=str(exc), **exc.diagnostics)
            continue
        entry.update(certified=True, c=fit.c, b=fit.b)
        marked = product_with_iid_mark(X, mu)

        def code(w):
            lab, bit = w[0]
            if lab == s1:
                return 1 if bit else STAR
            return 2 if lab == s2 else STAR

        Yp = minimize(block_factor(marked, 1, code, certificate=RenewalResolving(frozenset({1, 2}))))
        h_Yp = entropy_rate(Yp)
        bound = h_pair + binary_entropy(mu)
        entry.update({"h(Y')": h_Yp.value, "h(X')+H(mu)": bound.value, "margin": h_X.value - h_Yp.value})
        if strictly_below(h_Yp, h_X):
            chosen = (mu, q, fit, Yp, h_Yp, bound)
            break
        entry["reason"] = "entropy budget exceeded"
    W.step("mu_search", candidates=candidates)
    if chosen is None:
        raise PipelineError("no mu in the grid is feasible", {"candidates": candidates})
    mu, q, fit, Yp, h_Yp, bound = chosen
    W.ledger("h(Y')", h_Yp, bound, "<=")
    W.ledger("h(Y')", h_Yp, h_X, "<")

    Y, split = split_to_entropy(Yp, STAR, h_X)
    h_Y = entropy_rate(Y)
    W.ledger("h(Y)", h_Y, h_X, "equal")
    W.step("filler_split", mu=mu, states=len(Y), split=None if split is None else [str(w) for w in split.weights])

    W.check(verify_renewal_state(Yp, 1, depth))
    W.check(verify_renewal_state(Yp, 2, depth))
    law = return_time_distribution(Y, 1, law_horizon).pmf_upto(law_horizon)
    bad = next((n for n in range(law_horizon) if law[n] != q[n]), None)
    W.check(
        VerificationReport(
            "symbol_1_is_compound",
            Status.PASS if bad is None else Status.FAIL,
            lhs=law[-1] if bad is None else law[bad],
            rhs=q[law_horizon - 1] if bad is None else q[bad],
            witness={"horizon": law_horizon} if bad is None else {"n": bad + 1},
        )
    )
    W.check(same_return_law("symbol_2_law", X, s2, Y, 2, law_horizon))
    ok = (
        abs(h_Y.value - h_X.value) <= ENTROPY_MATCH_TOL
        and strictly_below(h_Yp, h_X)
        and h_Yp.value <= bound.value + bound.error + h_Yp.error
    )
    W.check(
        VerificationReport(
            "entropy_ledger",
            Status.PASS if ok else Status.FAIL,
            h_Y.value,
            h_X.value,
            tolerance=ENTROPY_MATCH_TOL,
            witness={} if ok else {"h(Y')": h_Yp.value, "bound": bound.value},
            note=f"margin h(X) - h(Y') = {h_X.value - h_Yp.value:.6g}",
        )
    )
    W.artifacts.update(Yp=Yp, Y=Y, T=T, fit=fit, mu=mu, compound=q)
    return Y, W


class StringingChoice(NamedTuple):
    k: int
    t1: object
    t2: object
    pair_entropy: float


def stringing_reduction(
    X: LabeledMarkovChain, s1: Symbol, entropy_budget: float, k_max: int = 8, depth: int = 2
) -> StringingChoice:
    """Smallest k such that two rare renewal words of ``X^k`` fit the entropy budget.

    Words containing ``s1`` are renewal states of the stringing; when the
    labeling of ``X`` is injective every word is. At each k the two least
    probable candidates are tried.
    """
    injective = len(set(X.labels)) == len(X)
    best = None
    for k in range(1, k_max + 1):
        Xk = k_stringing(X, k)
        pi = stationary_vector(Xk)
        prob: dict = {}
        for i, lab in enumerate(Xk.labels):
            prob[lab] = prob.get(lab, 0) + pi[i]
        contains = (lambda w: w == s1) if k == 1 else (lambda w: s1 in w)
        cands = [w for w in prob if prob[w] and (injective or contains(w))]
        if len(cands) < 2:
            continue
        t1, t2 = sorted(cands, key=lambda w: (prob[w], repr(w)))[:2]
        h = entropy_rate(pair_indicator(Xk, t1, t2)).value
        best = h if best is None else min(best, h)
        if h < entropy_budget:
            for t in (t1, t2):
                rep = verify_renewal_state(Xk, t, depth)
                if not rep.passed:
                    raise ChainError(f"word {t!r} failed the renewal check: {rep.line()}")
            return StringingChoice(k, t1, t2, h)
    if best is None:
        raise ChainError("no two distinct renewal words exist up to k_max")
    raise ChainError(f"k_max={k_max} insufficient: smallest pair entropy reached {best:.6g} >= {entropy_budget}")

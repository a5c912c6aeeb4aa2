"""Renewal process with semi-regular tail -> process with an IID-flagged marker symbol."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..chain import LabeledMarkovChain, Measure, RenewalResolving, Symbol, minimize, stationary_vector
from ..entropy import entropy_rate
from ..renewal import return_time_distribution, verify_renewal_state
from ..report import Status, VerificationReport
from ..tails import SemiRegularParams
from ..transforms import collapse_states, k_stringing
from .common import (
    ENTROPY_MATCH_TOL,
    PipelineError,
    PipelineWitness,
    split_to_entropy,
    strictly_below,
)
from .hazard import AlphaError, build_hazard_chain
from .marker import (
    MarkerConstruction,
    build_marker_construction,
    marker_parameters,
    verify_age_independence,
    verify_b_probability,
    verify_marker_independence,
)

STAR = "*"


def same_return_law(name, A, sa, B, sb, horizon: int) -> VerificationReport:
    """Exact equality of ``P(sa)`` and the return-time pmf of ``sa`` in A with those of ``sb`` in B."""
    pa = sum((stationary_vector(A)[i] for i in A.with_label(sa)), A.zero)
    pb = sum((stationary_vector(B)[i] for i in B.with_label(sb)), B.zero)
    la = return_time_distribution(A, sa, horizon).pmf_upto(horizon)
    lb = return_time_distribution(B, sb, horizon).pmf_upto(horizon)
    if pa != pb:
        return VerificationReport(name, Status.FAIL, pa, pb, witness={"what": "symbol probability"})
    for n, (x, y) in enumerate(zip(la, lb), start=1):
        if x != y:
            return VerificationReport(name, Status.FAIL, x, y, witness={"n": n})
    return VerificationReport(name, Status.PASS, pa, pb, witness={"horizon": horizon})


def marker_recurrence(chain: LabeledMarkovChain, sym: Symbol, k0: int, n_max: int) -> VerificationReport:
    """``P(X_n = sym | X_0 = sym) = P(X_n = sym) [n > k0]`` for ``1 <= n <= n_max``, exactly.

    This is the law of occurrences of a word ``0...01`` in an IID sequence
    whose last letter has no self-overlap.
    """
    pi = stationary_vector(chain)
    idx = set(chain.with_label(sym))
    p = sum((pi[i] for i in idx), chain.zero)
    m = Measure.from_weights(chain, {i: pi[i] for i in idx})
    for n in range(1, n_max + 1):
        m = m.step()
        if n % 8 == 0:
            m = m.reduced()
        got = m.mass(idx) / p
        want = p if n > k0 else 0
        if got != want:
            return VerificationReport(
                "marker_recurrence", Status.FAIL, got, want, witness={"n": n, "k0": k0}
            )
    return VerificationReport("marker_recurrence", Status.PASS, p, p, witness={"n_max": n_max, "k0": k0})


def forcing_check(chain: LabeledMarkovChain, sym: Symbol, filler, k0: int) -> VerificationReport:
    """After ``sym`` the next ``k0`` labels are all ``filler`` with probability one."""
    pi = stationary_vector(chain)
    idx = chain.with_label(sym)
    fill = {i for i, lab in enumerate(chain.labels) if lab == filler}
    m = Measure.from_weights(chain, {i: pi[i] for i in idx})
    start = m.mass()
    for _ in range(k0):
        m = m.step().restrict(fill)
    got = m.mass() / start
    return VerificationReport(
        "forcing",
        Status.PASS if got == 1 else Status.FAIL,
        got,
        Fraction(1),
        witness={} if got == 1 else {"k0": k0},
    )


def _indicator_chain(X: LabeledMarkovChain, M: MarkerConstruction, t: tuple) -> LabeledMarkovChain:
    def label(window):
        if M.in_b(window):
            return 1
        if tuple(lab[:2] for lab in window) == t:
            return 2
        return STAR

    return minimize(X.relabel(label, certificate=RenewalResolving(frozenset({1, 2}))))


def prop2_pipeline(
    Yp: LabeledMarkovChain,
    s: Symbol,
    epsilon_grid: Sequence,
    a: Symbol | None = None,
    params: SemiRegularParams | None = None,
    lump_K: int | None = None,
    depth: int | None = None,
    horizon: int = 400,
    law_horizon: int = 60,
    extra: int = 40,
) -> tuple[LabeledMarkovChain, PipelineWitness]:
    """Build a process whose symbol 1 occurs like the word ``0...01`` in an IID sequence.

    Parameters
    ----------
    Yp : LabeledMarkovChain
        Certified chain in which ``s`` is a renewal symbol with a
        semi-regular return time.
    epsilon_grid : sequence of Fraction
        Candidate mark rates; the largest feasible one is used.
    a : symbol, optional
        Non-renewal symbol of the collapsed-and-split process used for the
        word marking symbol 2. Defaults to the first split symbol.
    params : SemiRegularParams, optional
        Override for ``(c, k0)``.
    depth : int, optional
        Depth of the renewal checks on X'; defaults to ``k0 + 2``.

    Returns
    -------
    Xpp : LabeledMarkovChain
        Final chain over ``{1, 2}`` plus split filler symbols.
    witness : PipelineWitness
        ``witness.artifacts`` holds the intermediate chains and the
        :class:`MarkerConstruction`.

    Raises
    ------
    PipelineError
        When no epsilon in the grid keeps h(X') below h(Y, Z).
    """
    if not epsilon_grid:
        raise ValueError("empty epsilon grid")
    W = PipelineWitness()
    h_target = entropy_rate(Yp)
    f, found = marker_parameters(Yp, s, horizon)
    params = params or found
    k0 = params.k0
    W.step("semi_regular_params", c=params.c, k0=k0, hazard_window=f.K, tail_hazard=f.tail)

    # collapse to the renewal process of s, then split back up to equal entropy
    collapsed = collapse_states(Yp, s, STAR, keep_is_renewal=True)
    Z0 = build_hazard_chain(f)
    Y0 = Z0.renewal_view(s, STAR)
    W.check(same_return_law("collapse_is_renewal_process", collapsed, s, Y0, s, law_horizon))
    Y, split = split_to_entropy(Y0, STAR, h_target)
    h_Y = entropy_rate(Y)
    W.step("collapse_and_split", states=len(Y), split=None if split is None else dict(zip(map(repr, split.new_symbols), split.weights)))
    W.ledger("h(Y)", h_Y, h_target, "equal")
    if abs(h_Y.value - h_target.value) > ENTROPY_MATCH_TOL:
        raise PipelineError("split did not reach the target entropy", {"h(Y)": h_Y.value, "target": h_target.value})
    others = [x for x in Y.alphabet if x != s]
    a = sorted(others, key=repr)[0] if a is None else a
    if a == s or a not in Y.alphabet:
        raise ValueError(f"symbol {a!r} is not a non-renewal symbol of Y; choose from {others}")

    t = tuple((a, z) for z in range(1, k0 + 2))
    candidates = []
    chosen = None
    for eps in sorted((Fraction(e) for e in epsilon_grid), reverse=True):
        try:
            X, M = build_marker_construction(Y, s, eps, params, lump_K, horizon=horizon)
        except AlphaError as exc:
            raise PipelineError(str(exc), {"k0": k0, "c": params.c}) from exc
        Xp = _indicator_chain(X, M, t)
        h_Xp = entropy_rate(Xp)
        h_YZ = entropy_rate(M.joint)
        ok = strictly_below(h_Xp, h_YZ)
        candidates.append({"epsilon": eps, "h(X')": h_Xp.value, "h(Y,Z)": h_YZ.value, "feasible": ok})
        if ok:
            chosen = (eps, X, M, Xp, h_Xp, h_YZ)
            break
    W.step("epsilon_search", candidates=candidates)
    if chosen is None:
        raise PipelineError("no epsilon in the grid keeps h(X') below h(Y,Z)", {"candidates": candidates})
    eps, X, M, Xp, h_Xp, h_YZ = chosen
    W.step("marker_construction", epsilon=eps, k0=k0, c=M.c, lump_K=M.lump_K, states=len(X), b_probability=M.b_probability, alpha=list(M.alpha))
    W.ledger("h(Y,Z)", h_YZ, h_Y, "equal")
    W.ledger("h(X')", h_Xp, h_YZ, "<")

    Xpp, split2 = split_to_entropy(Xp, STAR, h_YZ)
    h_Xpp = entropy_rate(Xpp)
    W.ledger("h(X'')", h_Xpp, h_YZ, "equal")
    W.step("filler_split", states=len(Xpp), split=None if split2 is None else [str(w) for w in split2.weights])

    depth = k0 + 2 if depth is None else depth
    W.check(verify_renewal_state(Xp, 1, depth))
    W.check(verify_renewal_state(Xp, 2, depth))
    W.check(verify_b_probability(X, M))
    W.check(verify_marker_independence(X, M, k0 + extra))
    W.check(verify_age_independence(X, M))
    W.check(forcing_check(Xp, 1, STAR, k0))
    W.check(marker_recurrence(Xpp, 1, k0, k0 + extra + 1))
    YZk = k_stringing(M.joint, k0 + 1).relabel(lambda w: 2 if w == t else STAR)
    W.check(same_return_law("symbol_2_law", Xpp, 2, YZk, 2, law_horizon))
    entropy_ok = abs(h_Xpp.value - h_YZ.value) <= ENTROPY_MATCH_TOL and strictly_below(h_Xp, h_YZ)
    W.check(
        VerificationReport(
            "entropy_ledger",
            Status.PASS if entropy_ok else Status.FAIL,
            h_Xpp.value,
            h_YZ.value,
            tolerance=ENTROPY_MATCH_TOL,
            witness={} if entropy_ok else {"h(X')": h_Xp.value},
            note=f"margin h(Y,Z) - h(X') = {h_YZ.value - h_Xp.value:.6g}",
        )
    )
    W.artifacts.update(Y=Y, X=X, M=M, Xp=Xp, Xpp=Xpp, t=t)
    return Xpp, W

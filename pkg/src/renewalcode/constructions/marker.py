"""Marker words flagging a renewal k0 steps ahead, independent of the past."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from ..chain import ChainError, LabeledMarkovChain, Measure, Symbol, Unifilar, stationary_vector
from ..renewal import GEOMETRIC, hazard_from_pmf, return_time_distribution
from ..report import Status, VerificationReport
from ..tails import NotSemiRegular, SemiRegularParams, semi_regular_params
from ..transforms import k_stringing
from .hazard import AlphaSequence, HazardChain, build_hazard_chain, compute_alpha


@dataclass(frozen=True)
class MarkerConstruction:
    """Everything about the marker set ``b`` of a constructed chain.

    A window ``((y_i, z_i, a_i, w_i))_{i=0..k0}`` of the site process lies in
    ``b`` when ``z_k0 = 0``, the accept bit ``a_0`` is 1 and the mark
    pattern ``(w_0, ..., w_k0)`` equals ``marker_word``.
    """

    k0: int
    c: Fraction
    alpha: AlphaSequence
    epsilon: Fraction
    marker_word: tuple
    b_probability: Fraction
    hazard: HazardChain
    joint: LabeledMarkovChain
    site: LabeledMarkovChain
    renewal_symbol: Symbol

    @property
    def lump_K(self) -> int:
        return self.hazard.lump_K

    def in_b(self, window_labels: tuple) -> bool:
        first, last = window_labels[0], window_labels[-1]
        return (
            last[1] == 0
            and first[2] == 1
            and tuple(lab[3] for lab in window_labels) == self.marker_word
        )

    def b_states(self, X: LabeledMarkovChain) -> set[int]:
        return {i for i, lab in enumerate(X.labels) if self.in_b(lab)}


def joint_with_age(Y: LabeledMarkovChain, s: Symbol, lump: int) -> LabeledMarkovChain:
    """The pair (Y, Z), Z the age since the last ``s`` capped at ``lump``.

    Hidden states are ``(h, z)``; labels are ``(y, z)``. Only pairs reachable
    from the ``s`` states are built.
    """
    pi = stationary_vector(Y)
    start = [(i, 0) for i in Y.with_label(s) if pi[i]]
    if not start:
        raise ChainError(f"symbol {s!r} never occurs")
    pos = {st: n for n, st in enumerate(start)}
    order = list(start)
    queue = deque(start)
    edges = {}
    while queue:
        i, z = queue.popleft()
        row = {}
        for j, p in Y.rows[i]:
            nz = 0 if Y.labels[j] == s else min(z + 1, lump)
            key = (j, nz)
            if key not in pos:
                pos[key] = len(order)
                order.append(key)
                queue.append(key)
            row[pos[key]] = p
        edges[(i, z)] = row
    cert = Unifilar("age is read off the labels") if isinstance(Y.certificate, Unifilar) else None
    return LabeledMarkovChain(
        [(Y.states[i], z) for i, z in order],
        [edges[k] for k in order],
        [(Y.labels[i], z) for i, z in order],
        certificate=cert,
        validate=False,
    )


def _site_chain(joint: LabeledMarkovChain, alpha: AlphaSequence, eps: Fraction) -> LabeledMarkovChain:
    """(Y, Z) paired with an accept bit of rate ``alpha_Z`` and an independent mark of rate eps."""
    pi = stationary_vector(joint)
    bits = lambda p: [(b, q) for b, q in ((0, 1 - p), (1, p)) if q]  # noqa: E731
    names, labels, stat, parent = [], [], [], []
    for i, h in enumerate(joint.states):
        if not pi[i]:
            continue
        z = joint.labels[i][1]
        for a, pa in bits(alpha[z]):
            for w, pw in bits(eps):
                names.append((h, a, w))
                labels.append(joint.labels[i] + (a, w))
                stat.append(pi[i] * pa * pw)
                parent.append((i, pa * pw))
    children: dict[int, list] = {}
    for n, (i, _) in enumerate(parent):
        children.setdefault(i, []).append(n)
    rows = []
    for i, _ in parent:
        row = {}
        for j, p in joint.rows[i]:
            for n in children[j]:
                row[n] = p * parent[n][1]
        rows.append(row)
    return LabeledMarkovChain(names, rows, labels, stationary=stat, validate=False)


def marker_parameters(Y: LabeledMarkovChain, s: Symbol, horizon: int = 400):
    """Hazard of the return time of ``s`` and its semi-regular parameters."""
    T = return_time_distribution(Y, s, horizon)
    if T.tail != GEOMETRIC:
        raise NotSemiRegular(
            "return time has no certified geometric tail within the horizon",
            {"tail": T.tail, "horizon": horizon},
        )
    f = hazard_from_pmf(T)
    return f, semi_regular_params(f)


def build_marker_construction(
    Y: LabeledMarkovChain,
    s: Symbol,
    epsilon,
    params: SemiRegularParams | None = None,
    lump_K: int | None = None,
    constant=None,
    horizon: int = 400,
) -> tuple[LabeledMarkovChain, MarkerConstruction]:
    """Build the (k0+1)-stringing of (Y, Z, accept, W) and its marker set.

    Parameters
    ----------
    Y : LabeledMarkovChain
        Chain in which ``s`` is a renewal symbol with a semi-regular return time.
    epsilon : Fraction
        Rate of the IID mark W.
    params : SemiRegularParams, optional
        ``(c, k0)``; found from the hazard when omitted.
    lump_K : int, optional
        Age cap; defaults to the larger of the hazard window and ``k0 + 1``.
    constant : Fraction, optional
        Normalizing constant for alpha (default ``c**k0``).

    Returns
    -------
    X : LabeledMarkovChain
        Window chain; its labels are tuples of site labels ``(y, z, a, w)``.
    M : MarkerConstruction
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    f, found = marker_parameters(Y, s, horizon)
    params = params or found
    k0, c = params.k0, Fraction(params.c)
    lump = max(f.K, k0 + 1, 1) if lump_K is None else lump_K
    Z = build_hazard_chain(f, lump)
    alpha = compute_alpha(Z, k0, c, constant)
    joint = joint_with_age(Y, s, lump)
    site = _site_chain(joint, alpha, epsilon)
    X = k_stringing(site, k0 + 1)
    piZ = Z.stationary
    b_prob = sum(
        (piZ[k] * alpha.hit_probs[k] * alpha[k] for k in Z.ages()), Fraction(0)
    ) * (1 - epsilon) ** k0 * epsilon
    M = MarkerConstruction(
        k0=k0,
        c=c,
        alpha=alpha,
        epsilon=epsilon,
        marker_word=(0,) * k0 + (1,),
        b_probability=b_prob,
        hazard=Z,
        joint=joint,
        site=site,
        renewal_symbol=s,
    )
    return X, M


def b_probability_from_chain(X: LabeledMarkovChain, M: MarkerConstruction) -> Fraction:
    pi = stationary_vector(X)
    return sum((pi[i] for i in M.b_states(X)), Fraction(0))


def verify_marker_independence(
    X: LabeledMarkovChain, M: MarkerConstruction, n_max: int
) -> VerificationReport:
    """Exact check of ``P(X_0 in b, X_n in b)`` for ``1 <= n <= n_max``.

    It must vanish for ``n <= k0`` and equal ``P(b)**2`` afterwards.
    """
    b = M.b_states(X)
    pb = b_probability_from_chain(X, M)
    pi = stationary_vector(X)
    m = Measure.from_weights(X, {i: pi[i] for i in b})
    checked = []
    for n in range(1, n_max + 1):
        m = m.step()
        if n % 8 == 0:
            m = m.reduced()
        joint = m.mass(b)
        want = Fraction(0) if n <= M.k0 else pb * pb
        if joint != want:
            return VerificationReport(
                "marker_independence",
                Status.FAIL,
                lhs=joint,
                rhs=want,
                witness={"n": n, "k0": M.k0, "b_probability": pb},
            )
        checked.append(n)
    return VerificationReport(
        "marker_independence",
        Status.PASS,
        lhs=pb * pb,
        rhs=pb * pb,
        witness={"n_checked": [1, n_max], "k0": M.k0, "b_probability": pb},
        note="joint vanishes for n <= k0 and factorizes beyond",
    )


def verify_age_independence(X: LabeledMarkovChain, M: MarkerConstruction) -> VerificationReport:
    """``P(Z_0 = k | X_0 in b) = P(Z_0 = k)`` for every represented age, exactly."""
    pi = stationary_vector(X)
    b = M.b_states(X)
    pb = sum((pi[i] for i in b), Fraction(0))
    cond: dict[int, Fraction] = {}
    for i in b:
        z0 = X.labels[i][0][1]
        cond[z0] = cond.get(z0, Fraction(0)) + pi[i]
    stat = M.hazard.stationary
    for k in M.hazard.ages():
        got = cond.get(k, Fraction(0)) / pb
        if got != stat[k]:
            return VerificationReport(
                "age_independence", Status.FAIL, lhs=got, rhs=stat[k], witness={"age": k}
            )
    return VerificationReport(
        "age_independence",
        Status.PASS,
        lhs=tuple(stat),
        rhs=tuple(stat),
        witness={"ages": len(stat)},
    )


def verify_b_probability(X: LabeledMarkovChain, M: MarkerConstruction) -> VerificationReport:
    """Closed form against the stationary sum, and the bound ``P(b) <= epsilon``."""
    direct = b_probability_from_chain(X, M)
    ok = direct == M.b_probability and direct <= M.epsilon
    return VerificationReport(
        "b_probability",
        Status.PASS if ok else Status.FAIL,
        lhs=direct,
        rhs=M.b_probability,
        witness={} if ok else {"epsilon": M.epsilon},
    )

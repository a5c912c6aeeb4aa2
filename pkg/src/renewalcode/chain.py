"""Finite labeled Markov chains.

Every process handled by this package is a finite hidden Markov chain whose
states carry a symbol (the *label*). The observed process is the label
sequence of a stationary run of the hidden chain.

Probabilities are exact :class:`fractions.Fraction` values by default. A chain
built from floats runs in float mode; the two are never mixed inside a chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

Symbol = Hashable
Prob = Any  # Fraction in exact mode, float in float mode

FLOAT_ROW_TOL = 1e-12


class ChainError(ValueError):
    """Invalid chain, or a query the chain cannot answer."""


def as_probability(value, exact: bool = True):
    """Parse ``value`` into a probability.

    Strings such as ``"3/10"`` or ``"0.3"`` are read exactly. Floats are refused
    in exact mode, since ``Fraction(0.3)`` is not 3/10.
    """
    if exact:
        if isinstance(value, float):
            raise TypeError(f"float {value!r} given in exact mode; pass a string or Fraction")
        if isinstance(value, str):
            p = Fraction(value.strip())
        else:
            p = Fraction(value)
    else:
        p = float(Fraction(value)) if isinstance(value, str) else float(value)
    if p < 0 or p > 1:
        raise ValueError(f"probability {value!r} outside [0, 1]")
    return p


# ---------------------------------------------------------------------------
# resolving certificates


@dataclass(frozen=True)
class Unifilar:
    """Each hidden state has at most one successor per label, and some word
    synchronizes the presentation. The hidden state is then a function of the
    label past, and the entropy rate is the mean row entropy."""

    note: str = ""


@dataclass(frozen=True)
class RenewalResolving:
    """All labels but at most one are renewal symbols.

    The label past then reduces to (last renewal symbol, time since it).
    """

    renewal_symbols: frozenset


@dataclass(frozen=True)
class Derived:
    """Entropy rate equals ``entropy(base) + increment``."""

    base: "LabeledMarkovChain"
    increment: float
    reason: str


Certificate = Unifilar | RenewalResolving | Derived | None


# ---------------------------------------------------------------------------


class LabeledMarkovChain:
    """A finite Markov chain with a symbol attached to every hidden state.

    Parameters
    ----------
    states : sequence of hashable
        Hidden state names, unique.
    rows : sequence of mappings
        ``rows[i]`` maps target index ``j`` to ``P(i -> j)``. Zero entries may
        be omitted.
    labels : sequence of hashable
        ``labels[i]`` is the symbol emitted in state ``i``.
    certificate : optional
        Why the entropy rate of the label process is computable (see
        :mod:`renewalcode.entropy`). A chain whose labeling is injective is
        automatically :class:`Unifilar`.
    stationary : optional sequence
        A known stationary vector. It is checked against ``pi P = pi``.
    """

    def __init__(
        self,
        states: Sequence[Hashable],
        rows: Sequence[Mapping[int, Prob]],
        labels: Sequence[Symbol],
        certificate: Certificate = None,
        stationary: Sequence[Prob] | None = None,
        validate: bool = True,
    ):
        self.states = tuple(states)
        self.labels = tuple(labels)
        n = len(self.states)
        if n == 0:
            raise ChainError("chain needs at least one state")
        if len(self.labels) != n or len(rows) != n:
            raise ChainError("states, rows and labels must have equal length")
        self.index = {h: i for i, h in enumerate(self.states)}
        if len(self.index) != n:
            raise ChainError("duplicate hidden state names")
        self.rows = tuple(tuple((j, p) for j, p in sorted(r.items()) if p != 0) for r in rows)
        self.mode = self._detect_mode()
        if validate:
            self._validate()
        if certificate is None and len(set(self.labels)) == n:
            certificate = Unifilar("injective labeling")
        self.certificate = certificate
        self._stationary = None
        if stationary is not None:
            pi = tuple(stationary)
            if validate:
                self._check_stationary(pi)
            self._stationary = pi

    # construction helpers -------------------------------------------------

    @classmethod
    def from_dict(
        cls,
        transitions: Mapping[Hashable, Mapping[Hashable, Any]],
        labels: Mapping[Hashable, Symbol] | None = None,
        exact: bool = True,
        certificate: Certificate = None,
    ) -> "LabeledMarkovChain":
        """Build from ``{state: {next_state: prob}}``; labels default to state names."""
        states = list(transitions)
        for row in transitions.values():
            for t in row:
                if t not in transitions:
                    raise ChainError(f"transition target {t!r} is not a state")
        index = {h: i for i, h in enumerate(states)}
        rows = [
            {index[t]: as_probability(p, exact) for t, p in transitions[h].items()} for h in states
        ]
        labs = [labels[h] if labels is not None else h for h in states]
        return cls(states, rows, labs, certificate=certificate)

    @classmethod
    def from_matrix(
        cls,
        matrix: Sequence[Sequence[Any]],
        labels: Sequence[Symbol] | None = None,
        states: Sequence[Hashable] | None = None,
        exact: bool = True,
        certificate: Certificate = None,
    ) -> "LabeledMarkovChain":
        n = len(matrix)
        states = list(states) if states is not None else list(range(n))
        rows = [
            {j: as_probability(p, exact) for j, p in enumerate(r) if p != 0 and p != "0"}
            for r in matrix
        ]
        return cls(states, rows, list(labels) if labels is not None else states, certificate)

    def _detect_mode(self) -> str:
        kinds = {type(p) for r in self.rows for _, p in r}
        if kinds <= {Fraction, int}:
            return "exact"
        if kinds <= {float}:
            return "float"
        raise ChainError(f"mixed probability types {sorted(k.__name__ for k in kinds)}")

    def _validate(self):
        for i, r in enumerate(self.rows):
            if not r:
                raise ChainError(f"state {self.states[i]!r} has no outgoing transitions")
            for j, p in r:
                if not 0 <= j < len(self.states):
                    raise ChainError(f"bad target index {j} in row {i}")
                if p < 0:
                    raise ChainError(f"negative transition probability in row {i}")
            total = sum(p for _, p in r)
            if self.mode == "exact":
                if total != 1:
                    raise ChainError(f"row {self.states[i]!r} sums to {total}, not 1")
            elif abs(total - 1.0) > FLOAT_ROW_TOL:
                raise ChainError(f"row {self.states[i]!r} sums to {total!r}")

    def _check_stationary(self, pi):
        if len(pi) != len(self.states):
            raise ChainError("stationary vector has wrong length")
        out = [0] * len(pi)
        for i, r in enumerate(self.rows):
            if pi[i]:
                for j, p in r:
                    out[j] += pi[i] * p
        if self.mode == "exact":
            if out != list(pi) or sum(pi) != 1:
                raise ChainError("supplied stationary vector does not satisfy pi P = pi")
        elif max(abs(a - b) for a, b in zip(out, pi)) > 1e-10:
            raise ChainError("supplied stationary vector does not satisfy pi P = pi")

    # basic queries --------------------------------------------------------

    def __len__(self) -> int:
        return len(self.states)

    def __repr__(self) -> str:
        return (
            f"LabeledMarkovChain(n={len(self)}, alphabet={len(self.alphabet)}, "
            f"mode={self.mode}, certificate={type(self.certificate).__name__})"
        )

    @cached_property
    def alphabet(self) -> tuple:
        """Symbols in order of first appearance."""
        return tuple(dict.fromkeys(self.labels))

    def with_label(self, symbol: Symbol) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == symbol]

    def prob(self, i: int, j: int) -> Prob:
        for k, p in self.rows[i]:
            if k == j:
                return p
        return self.zero

    @property
    def zero(self):
        return Fraction(0) if self.mode == "exact" else 0.0

    @property
    def one(self):
        return Fraction(1) if self.mode == "exact" else 1.0

    def dense(self) -> list[list[Prob]]:
        n = len(self)
        m = [[self.zero] * n for _ in range(n)]
        for i, r in enumerate(self.rows):
            for j, p in r:
                m[i][j] = p
        return m

    def transition_dict(self) -> dict:
        return {self.states[i]: {self.states[j]: p for j, p in r} for i, r in enumerate(self.rows)}

    def relabel(self, mapping: Mapping | Callable, certificate: Certificate = None):
        """Same hidden chain, new labels. The certificate must be supplied anew."""
        f = mapping if callable(mapping) else mapping.__getitem__
        return LabeledMarkovChain(
            self.states,
            [dict(r) for r in self.rows],
            [f(lab) for lab in self.labels],
            certificate=certificate,
            stationary=self._stationary,
            validate=False,
        )

    def with_certificate(self, certificate: Certificate) -> "LabeledMarkovChain":
        return LabeledMarkovChain(
            self.states,
            [dict(r) for r in self.rows],
            self.labels,
            certificate=certificate,
            stationary=self._stationary,
            validate=False,
        )

    # integer form for fast exact propagation ------------------------------

    @cached_property
    def integer_form(self) -> tuple[int, tuple[tuple[tuple[int, int], ...], ...]]:
        """``(D, rows)`` with ``P(i, j) = N_ij / D`` and integer ``N_ij``."""
        if self.mode != "exact":
            raise ChainError("integer form only exists in exact mode")
        den = 1
        for r in self.rows:
            for _, p in r:
                den = math.lcm(den, p.denominator)
        rows = tuple(tuple((j, p.numerator * (den // p.denominator)) for j, p in r) for r in self.rows)
        return den, rows


# ---------------------------------------------------------------------------
# exact vectors


class Measure:
    """A nonnegative vector over hidden states, stored as ``num / den``.

    In exact mode ``num`` holds Python ints and ``den`` is a common
    denominator; in float mode ``den`` is 1.0. Stepping multiplies by the
    transition matrix without ever forming a Fraction.
    """

    __slots__ = ("chain", "num", "den")

    def __init__(self, chain: LabeledMarkovChain, num: dict, den=1):
        self.chain = chain
        self.num = num
        self.den = den

    @classmethod
    def from_weights(cls, chain: LabeledMarkovChain, weights: Mapping[int, Prob]):
        if chain.mode == "float":
            return cls(chain, {i: float(w) for i, w in weights.items() if w}, 1.0)
        den = 1
        for w in weights.values():
            den = math.lcm(den, Fraction(w).denominator)
        num = {}
        for i, w in weights.items():
            w = Fraction(w)
            if w:
                num[i] = w.numerator * (den // w.denominator)
        return cls(chain, num, den)

    def step(self) -> "Measure":
        chain = self.chain
        out: dict[int, Any] = {}
        get = out.get
        if chain.mode == "exact":
            d, rows = chain.integer_form
            for i, v in self.num.items():
                for j, p in rows[i]:
                    out[j] = get(j, 0) + v * p
            return Measure(chain, out, self.den * d)
        for i, v in self.num.items():
            for j, p in chain.rows[i]:
                out[j] = get(j, 0.0) + v * p
        return Measure(chain, out, 1.0)

    def restrict(self, allowed) -> "Measure":
        return Measure(self.chain, {i: v for i, v in self.num.items() if i in allowed}, self.den)

    def mass(self, subset=None):
        if subset is None:
            tot = sum(self.num.values())
        else:
            tot = sum(v for i, v in self.num.items() if i in subset)
        if self.chain.mode == "exact":
            return Fraction(tot, self.den)
        return tot / self.den

    def weights(self) -> dict[int, Prob]:
        if self.chain.mode == "exact":
            return {i: Fraction(v, self.den) for i, v in self.num.items() if v}
        return {i: v for i, v in self.num.items() if v}

    def reduced(self) -> "Measure":
        """Divide out the common gcd; keeps integers small over long runs."""
        if self.chain.mode != "exact" or not self.num:
            return self
        g = self.den
        for v in self.num.values():
            g = math.gcd(g, v)
            if g == 1:
                return self
        return Measure(self.chain, {i: v // g for i, v in self.num.items()}, self.den // g)


# ---------------------------------------------------------------------------
# structure and stationary law


def communicating_classes(chain: LabeledMarkovChain) -> tuple[list[list[int]], list[list[int]]]:
    """Return ``(closed_classes, transient_classes)`` as lists of state indices."""
    n = len(chain)
    rr, cc = [], []
    for i, r in enumerate(chain.rows):
        for j, _ in r:
            rr.append(i)
            cc.append(j)
    graph = csr_matrix(([1] * len(rr), (rr, cc)), shape=(n, n))
    ncomp, comp = connected_components(graph, directed=True, connection="strong")
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for i, c in enumerate(comp):
        members[c].append(i)
    closed, transient = [], []
    for c, mem in enumerate(members):
        leaves = any(comp[j] != c for i in mem for j, _ in chain.rows[i])
        (transient if leaves else closed).append(mem)
    return closed, transient


def _gth(block: list[list[Fraction]]) -> list[Fraction]:
    """Grassmann-Taksar-Heyman state reduction; subtraction free, exact for Fractions."""
    n = len(block)
    a = [row[:] for row in block]
    for k in range(n - 1, 0, -1):
        s = sum(a[k][:k])
        if s == 0:
            raise ChainError("GTH pivot vanished; class is not irreducible")
        for i in range(k):
            a[i][k] /= s
        for i in range(k):
            aik = a[i][k]
            if aik:
                ai, ak = a[i], a[k]
                for j in range(k):
                    if ak[j]:
                        ai[j] += aik * ak[j]
    pi = [a[0][0] * 0 + 1] + [a[0][0] * 0] * (n - 1)
    for j in range(1, n):
        pi[j] = sum(pi[i] * a[i][j] for i in range(j))
    tot = sum(pi)
    return [p / tot for p in pi]


def stationary_distribution(chain: LabeledMarkovChain) -> dict[Hashable, Prob]:
    """Stationary law of ``chain`` keyed by hidden state name."""
    return dict(zip(chain.states, stationary_vector(chain)))


def stationary_vector(chain: LabeledMarkovChain) -> tuple:
    if chain._stationary is not None:
        return chain._stationary
    closed, _ = communicating_classes(chain)
    if len(closed) > 1:
        named = [[chain.states[i] for i in c] for c in closed]
        raise ChainError(f"chain has {len(closed)} recurrent classes: {named}")
    cls = closed[0]
    pos = {h: k for k, h in enumerate(cls)}
    block = [[chain.zero] * len(cls) for _ in cls]
    for a, i in enumerate(cls):
        for j, p in chain.rows[i]:
            block[a][pos[j]] = p
    if chain.mode == "exact":
        sol = _gth(block)
    else:
        sol = _float_stationary(block)
    pi = [chain.zero] * len(chain)
    for a, i in enumerate(cls):
        pi[i] = sol[a]
    chain._stationary = tuple(pi)
    return chain._stationary


def _float_stationary(block):
    import numpy as np

    p = np.array(block, dtype=float)
    n = p.shape[0]
    a = np.vstack([(p.T - np.eye(n)), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    sol = np.clip(sol, 0.0, None)
    return list(sol / sol.sum())


def symbol_probability(chain: LabeledMarkovChain, symbol: Symbol) -> Prob:
    pi = stationary_vector(chain)
    return sum((pi[i] for i in chain.with_label(symbol)), chain.zero)


def label_distribution(chain: LabeledMarkovChain) -> dict[Symbol, Prob]:
    pi = stationary_vector(chain)
    out: dict[Symbol, Prob] = {}
    for i, lab in enumerate(chain.labels):
        out[lab] = out.get(lab, chain.zero) + pi[i]
    return out


# ---------------------------------------------------------------------------
# lumping


def _refine(chain: LabeledMarkovChain, live: list[int]) -> dict[int, int]:
    """Label-respecting partition refinement; returns a block id per live state."""
    exact = chain.mode == "exact"
    rows = chain.integer_form[1] if exact else chain.rows
    sym_id = {s: k for k, s in enumerate(chain.alphabet)}
    block = {i: sym_id[chain.labels[i]] for i in live}
    nblocks = len(set(block.values()))
    while True:
        sigs: dict = {}
        new = {}
        for i in live:
            acc: dict[int, Any] = {}
            for j, p in rows[i]:
                b = block[j]
                acc[b] = acc.get(b, 0) + p
            if not exact:
                acc = {b: round(v, 12) for b, v in acc.items()}
            new[i] = sigs.setdefault((block[i], tuple(sorted(acc.items()))), len(sigs))
        block = new
        if len(sigs) == nblocks:
            return block
        nblocks = len(sigs)


def minimize(chain: LabeledMarkovChain) -> LabeledMarkovChain:
    """Coarsest exact lumping that respects labels.

    Two states end up merged when they carry the same label and send the same
    probability into every block. The label process is unchanged in law, so
    the certificate carries over. States with zero stationary mass are dropped.
    """
    pi = stationary_vector(chain)
    live = [i for i in range(len(chain)) if pi[i]]
    block = _refine(chain, live)
    rep: dict[int, int] = {}
    for i in live:
        rep.setdefault(block[i], i)
    order = sorted(rep)
    pos = {b: k for k, b in enumerate(order)}
    new_rows = []
    for b in order:
        acc = {}
        for j, p in chain.rows[rep[b]]:
            acc[pos[block[j]]] = acc.get(pos[block[j]], chain.zero) + p
        new_rows.append(acc)
    mass = [chain.zero] * len(order)
    for i in live:
        mass[pos[block[i]]] += pi[i]
    return LabeledMarkovChain(
        [chain.states[rep[b]] for b in order],
        new_rows,
        [chain.labels[rep[b]] for b in order],
        certificate=chain.certificate,
        stationary=mass,
        validate=False,
    )


def chains_equal(a: LabeledMarkovChain, b: LabeledMarkovChain) -> bool:
    """Exact equality up to hidden-state renaming, after minimization.

    The two chains are refined jointly on their disjoint union; they agree
    when every block receives the same stationary mass from each side.
    """
    if a.mode != b.mode:
        return False
    pa, pb = stationary_vector(a), stationary_vector(b)
    off = len(a)
    u = LabeledMarkovChain(
        [("a", h) for h in a.states] + [("b", h) for h in b.states],
        [dict(r) for r in a.rows] + [{j + off: p for j, p in r} for r in b.rows],
        list(a.labels) + list(b.labels),
        validate=False,
    )
    live = [i for i in range(off) if pa[i]] + [off + i for i in range(len(b)) if pb[i]]
    block = _refine(u, list(range(len(u))))
    left: dict[int, Any] = {}
    right: dict[int, Any] = {}
    for i in live:
        side, w = (left, pa[i]) if i < off else (right, pb[i - off])
        side[block[i]] = side.get(block[i], 0) + w
    if a.mode == "float":
        return left.keys() == right.keys() and all(abs(left[k] - right[k]) < 1e-12 for k in left)
    return left == right


def iter_words(alphabet: Iterable[Symbol], length: int):
    from itertools import product

    return product(tuple(alphabet), repeat=length)

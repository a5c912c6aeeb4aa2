"""Process transforms: stringing, independent splitting, collapsing, marking, block factors."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

from .chain import (
    ChainError,
    Derived,
    LabeledMarkovChain,
    RenewalResolving,
    Symbol,
    Unifilar,
    as_probability,
    stationary_vector,
    symbol_probability,
)
from .entropy import binary_entropy, certify_unifilar, shannon

DEFAULT_STATE_CAP = 20_000


class StateCapExceeded(ChainError):
    pass


def state_cap() -> int:
    return int(os.environ.get("RENEWALCODE_STATE_CAP", DEFAULT_STATE_CAP))


@dataclass(frozen=True)
class SplitDistribution:
    new_symbols: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "new_symbols", tuple(self.new_symbols))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.new_symbols) != len(self.weights) or not self.weights:
            raise ValueError("one weight per new symbol")
        if len(set(self.new_symbols)) != len(self.new_symbols):
            raise ValueError("duplicate new symbols")
        if any(w <= 0 for w in self.weights):
            raise ValueError("split weights must be positive")
        total = sum(self.weights)
        if total != 1 if isinstance(total, (Fraction, int)) else abs(total - 1) > 1e-12:
            raise ValueError(f"split weights sum to {total}")

    def entropy(self) -> float:
        return shannon(self.weights)


@dataclass(frozen=True)
class MarkParams:
    epsilon: Fraction

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("mark rate must lie in (0, 1)")


def _inherit(chain: LabeledMarkovChain, increment: float, reason: str):
    if isinstance(chain.certificate, Unifilar):
        return Unifilar(f"{reason} of a unifilar chain")
    if chain.certificate is None:
        return None
    return Derived(chain, increment, reason)


def k_stringing(chain: LabeledMarkovChain, k: int, cap: int | None = None) -> LabeledMarkovChain:
    """Chain of overlapping k-windows; hidden states are positive-probability paths."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return chain
    cap = state_cap() if cap is None else cap
    pi = stationary_vector(chain)
    paths = [((i,), pi[i]) for i in range(len(chain)) if pi[i]]
    for _ in range(k - 1):
        nxt = []
        for path, w in paths:
            for j, p in chain.rows[path[-1]]:
                nxt.append((path + (j,), w * p))
        if len(nxt) > cap:
            raise StateCapExceeded(f"{k}-stringing needs more than {cap} states")
        paths = nxt
    pos = {path: n for n, (path, _) in enumerate(paths)}
    rows = []
    for path, _ in paths:
        row = {}
        for j, p in chain.rows[path[-1]]:
            row[pos[path[1:] + (j,)]] = p
        rows.append(row)
    names = [tuple(chain.states[i] for i in path) for path, _ in paths]
    labels = [tuple(chain.labels[i] for i in path) for path, _ in paths]
    return LabeledMarkovChain(
        names,
        rows,
        labels,
        certificate=_inherit(chain, 0.0, f"{k}-stringing"),
        stationary=[w for _, w in paths],
        validate=False,
    )


def independent_split(chain: LabeledMarkovChain, s: Symbol, split: SplitDistribution) -> LabeledMarkovChain:
    """Replace each occurrence of ``s`` by an independent draw from ``split``."""
    if set(split.new_symbols) & set(chain.alphabet) - {s} or (
        s in split.new_symbols and len(split.new_symbols) > 1
    ):
        raise ChainError(f"split symbols {split.new_symbols} overlap the alphabet")
    ps = symbol_probability(chain, s)
    if ps == 0:
        raise ChainError(f"symbol {s!r} has zero probability")
    pi = stationary_vector(chain)
    names, labels, stat, origin = [], [], [], []
    for i, h in enumerate(chain.states):
        if chain.labels[i] == s:
            for sym, w in zip(split.new_symbols, split.weights):
                names.append((h, sym))
                labels.append(sym)
                stat.append(pi[i] * w)
                origin.append((i, w))
        else:
            names.append(h)
            labels.append(chain.labels[i])
            stat.append(pi[i])
            origin.append((i, None))
    targets: dict[int, list] = {}
    for n, (i, w) in enumerate(origin):
        targets.setdefault(i, []).append((n, w))
    rows = []
    for i, _ in origin:
        row = {}
        for j, p in chain.rows[i]:
            for n, w in targets[j]:
                row[n] = p * w if w is not None else p
        rows.append(row)
    return LabeledMarkovChain(
        names,
        rows,
        labels,
        certificate=_inherit(chain, float(ps) * split.entropy(), f"split of {s!r}"),
        stationary=stat,
        validate=False,
    )


def collapse_states(
    chain: LabeledMarkovChain, keep: Symbol, star: Symbol = "*", keep_is_renewal: bool = False
) -> LabeledMarkovChain:
    """Send every label other than ``keep`` to ``star``; the hidden chain is untouched.

    The result carries a renewal certificate only when the caller vouches
    that ``keep`` is a renewal symbol.
    """
    if star == keep:
        raise ValueError("star must differ from keep")
    if keep not in chain.alphabet:
        raise ChainError(f"symbol {keep!r} not in alphabet")
    cert = RenewalResolving(frozenset({keep})) if keep_is_renewal else None
    return chain.relabel(lambda lab: lab if lab == keep else star, certificate=cert)


def merge_labels(chain: LabeledMarkovChain, mapping: Mapping[Symbol, Symbol]) -> LabeledMarkovChain:
    """Relabel through ``mapping`` (unlisted symbols kept). No certificate survives."""
    return chain.relabel(lambda lab: mapping.get(lab, lab))


def product_with_iid_mark(chain: LabeledMarkovChain, params: MarkParams | Fraction) -> LabeledMarkovChain:
    """Pair the chain with an independent Bernoulli(epsilon) bit at every site."""
    eps = params.epsilon if isinstance(params, MarkParams) else params
    if not 0 < eps < 1:
        raise ValueError("mark rate must lie in (0, 1)")
    pi = stationary_vector(chain)
    bern = {0: 1 - eps, 1: eps}
    names, labels, stat = [], [], []
    for i, h in enumerate(chain.states):
        for b in (0, 1):
            names.append((h, b))
            labels.append((chain.labels[i], b))
            stat.append(pi[i] * bern[b])
    rows = []
    for i in range(len(chain)):
        row = {}
        for j, p in chain.rows[i]:
            for b in (0, 1):
                row[2 * j + b] = p * bern[b]
        rows.extend([row, dict(row)])
    return LabeledMarkovChain(
        names,
        rows,
        labels,
        certificate=_inherit(chain, binary_entropy(eps), "Bernoulli mark"),
        stationary=stat,
        validate=False,
    )


def block_factor(
    chain: LabeledMarkovChain,
    window: int,
    mapping: Mapping[tuple, Symbol] | Callable[[tuple], Symbol],
    certificate=None,
    cap: int | None = None,
) -> LabeledMarkovChain:
    """Stringing followed by a relabelling of each window.

    ``mapping`` receives k-tuples of labels (1-tuples when ``window == 1``).
    Without an explicit ``certificate`` the result is tested for unifilarity
    when small, and otherwise left uncertified.
    """
    if window == 1:
        base = chain.relabel(lambda lab: (lab,))
    else:
        base = k_stringing(chain, window, cap)
    if not callable(mapping):
        missing = sorted({lab for lab in base.labels if lab not in mapping}, key=repr)
        if missing:
            raise ChainError(f"block map misses occurring words: {missing[:20]}")
        f = mapping.__getitem__
    else:
        f = mapping
    out = base.relabel(f, certificate=certificate)
    if certificate is None and len(out) <= 400:
        try:
            out = out.with_certificate(certify_unifilar(out))
        except ChainError:
            pass
    return out


def symbol_names(base: Hashable, count: int, avoid: Sequence) -> tuple:
    """Fresh symbols ``(base, 0), (base, 1), ...`` not already in ``avoid``."""
    out = tuple((base, i) for i in range(count))
    if set(out) & set(avoid):
        raise ChainError(f"fresh symbols for {base!r} collide with the alphabet")
    return out


def parse_split(symbols: Sequence, weights: Sequence, exact: bool = True) -> SplitDistribution:
    return SplitDistribution(tuple(symbols), tuple(as_probability(w, exact) for w in weights))

"""Entropy rates of label processes (natural log)."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .chain import (
    ChainError,
    Derived,
    LabeledMarkovChain,
    Measure,
    RenewalResolving,
    Unifilar,
    stationary_vector,
)

TRUNCATION_MASS = 1e-17


@dataclass(frozen=True)
class EntropyValue:
    value: float
    error: float = 0.0

    def __float__(self) -> float:
        return self.value

    def __sub__(self, other):
        other_v = other.value if isinstance(other, EntropyValue) else float(other)
        other_e = other.error if isinstance(other, EntropyValue) else 0.0
        return EntropyValue(self.value - other_v, self.error + other_e)

    def __add__(self, other):
        other_v = other.value if isinstance(other, EntropyValue) else float(other)
        other_e = other.error if isinstance(other, EntropyValue) else 0.0
        return EntropyValue(self.value + other_v, self.error + other_e)


def binary_entropy(p) -> float:
    p = float(p)
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def shannon(weights) -> float:
    tot = float(sum(weights))
    return -sum(float(w) / tot * math.log(float(w) / tot) for w in weights if w)


def entropy_rate(chain: LabeledMarkovChain) -> EntropyValue:
    """Entropy rate of the label process of ``chain``.

    Only chains carrying a resolving certificate are accepted; for a general
    hidden chain the hidden entropy may exceed that of the labels.
    """
    cert = chain.certificate
    if len(chain.alphabet) == 1:
        return EntropyValue(0.0)
    if isinstance(cert, Unifilar):
        return _unifilar_entropy(chain)
    if isinstance(cert, RenewalResolving):
        return _renewal_entropy(chain, cert.renewal_symbols)
    if isinstance(cert, Derived):
        return entropy_rate(cert.base) + cert.increment
    raise ChainError("no resolving certificate: entropy of hidden chain may exceed label-process entropy")


def _unifilar_entropy(chain: LabeledMarkovChain) -> EntropyValue:
    pi = stationary_vector(chain)
    h = 0.0
    for i, r in enumerate(chain.rows):
        if pi[i]:
            h += float(pi[i]) * shannon([p for _, p in r])
    return EntropyValue(h, 8 * len(chain) * 2.2e-16 * max(h, 1.0))


def _renewal_entropy(chain: LabeledMarkovChain, renewal_symbols) -> EntropyValue:
    """Sum over (last renewal symbol r, time j since it) of P(r, j) H(next | r, j).

    Between renewal symbols only the single non-renewal label can occur, so
    the pair (r, j) is the whole relevant past.
    """
    others = set(chain.alphabet) - set(renewal_symbols)
    if len(others) > 1:
        raise ChainError(f"renewal certificate allows one non-renewal label, found {sorted(map(repr, others))}")
    pi = [float(p) for p in stationary_vector(chain)]
    fchain = _float_view(chain)
    other_idx = {i for i, lab in enumerate(chain.labels) if lab in others}
    by_label: dict = {}
    for i, lab in enumerate(chain.labels):
        by_label.setdefault(lab, []).append(i)
    h = 0.0
    err = 0.0
    for r in renewal_symbols:
        m = Measure(fchain, {i: pi[i] for i in by_label.get(r, []) if pi[i]}, 1.0)
        steps = 0
        prev_mass = None
        while m.num:
            mass = m.mass()
            if mass < TRUNCATION_MASS:
                ratio = mass / prev_mass if prev_mass else 0.5
                ratio = min(ratio, 1 - 1e-9)
                err += mass / (1 - ratio) * math.log(max(len(chain.alphabet), 2))
                break
            nxt = m.step()
            weights = [sum(nxt.num.get(i, 0.0) for i in idx) for idx in by_label.values()]
            h += mass * shannon(weights)
            m = nxt.restrict(other_idx)
            prev_mass = mass
            steps += 1
            if steps > 10_000_000:
                raise ChainError("renewal entropy did not converge")
    return EntropyValue(h, err + 1e-14 * max(h, 1.0))


def _float_view(chain: LabeledMarkovChain) -> LabeledMarkovChain:
    if chain.mode == "float":
        return chain
    return LabeledMarkovChain(
        chain.states,
        [{j: float(p) for j, p in r} for r in chain.rows],
        chain.labels,
        certificate=chain.certificate,
        validate=False,
    )


# ---------------------------------------------------------------------------


def certify_unifilar(chain: LabeledMarkovChain, max_states: int = 400) -> Unifilar:
    """Check unifilarity and find a synchronizing word, or raise ChainError.

    Unifilar: no state has two successors with the same label. Synchronizing:
    some label word, read from every live state, leaves at most one possible
    state. Together these make the hidden state a function of the label past.
    """
    pi = stationary_vector(chain)
    live = [i for i in range(len(chain)) if pi[i]]
    if len(live) > max_states:
        raise ChainError(f"synchronization search capped at {max_states} states")
    delta: dict = {}
    for i in live:
        seen = {}
        for j, _ in chain.rows[i]:
            lab = chain.labels[j]
            if lab in seen:
                raise ChainError(f"state {chain.states[i]!r} has two successors labelled {lab!r}")
            seen[lab] = j
        delta[i] = seen
    current = set(live)
    while len(current) > 1:
        p, q = sorted(current)[:2]
        word = _merge_word(delta, p, q)
        if word is None:
            raise ChainError(f"no word separates or merges states {chain.states[p]!r}, {chain.states[q]!r}")
        nxt = set()
        for x in current:
            for lab in word:
                x = delta[x].get(lab)
                if x is None:
                    break
            if x is not None:
                nxt.add(x)
        current = nxt
    return Unifilar("checked: unifilar and synchronizing")


def _merge_word(delta, p, q):
    """BFS over state pairs for a word after which p and q coincide or one dies."""
    start = (p, q)
    parent = {start: None}
    queue = deque([start])
    while queue:
        a, b = queue.popleft()
        for lab in set(delta[a]) | set(delta[b]):
            na, nb = delta[a].get(lab), delta[b].get(lab)
            if na is None and nb is None:
                continue
            word_end = (na is None) != (nb is None) or na == nb
            key = (min(na, nb), max(na, nb)) if not word_end else None
            if word_end or key not in parent:
                if word_end:
                    word = [lab]
                    cur = (a, b)
                    while parent[cur] is not None:
                        prev, l2 = parent[cur]
                        word.append(l2)
                        cur = prev
                    return list(reversed(word))
                parent[key] = ((a, b), lab)
                queue.append(key)
    return None

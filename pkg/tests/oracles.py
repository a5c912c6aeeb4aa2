"""Brute-force reference computations, independent of the library's propagation code.

Everything here works on dense Fraction matrices or explicit path enumeration
and is only meant for tiny inputs.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def dense(chain):
    n = len(chain)
    P = [[Fraction(0)] * n for _ in range(n)]
    for i, row in enumerate(chain.rows):
        for j, p in row:
            P[i][j] = Fraction(p)
    return P


def stationary_numpy(chain) -> np.ndarray:
    """Float stationary law from the left null space, for irreducible chains."""
    P = np.array([[float(x) for x in r] for r in dense(chain)])
    n = len(P)
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    return np.linalg.lstsq(A, b, rcond=None)[0]


def stationary_exact(chain) -> list[Fraction]:
    """Solve ``pi (P - I) = 0, sum pi = 1`` by Gaussian elimination over Fractions."""
    P = dense(chain)
    n = len(P)
    rows = [[P[j][i] - (1 if i == j else 0) for j in range(n)] + [Fraction(0)] for i in range(n)]
    rows[-1] = [Fraction(1)] * n + [Fraction(1)]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = rows[col][col]
        rows[col] = [x / pv for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return [rows[i][n] for i in range(n)]


def path_word_laws(chain, pi, length: int) -> dict:
    """``P(X_0..X_{length-1} = w)`` for every label word, by enumerating hidden paths."""
    P = dense(chain)
    n = len(P)
    out: dict = {}
    for path in itertools.product(range(n), repeat=length):
        p = Fraction(pi[path[0]])
        for a, b in zip(path, path[1:]):
            p *= P[a][b]
            if not p:
                break
        if p:
            w = tuple(chain.labels[i] for i in path)
            out[w] = out.get(w, 0) + p
    return out


def forward_word_prob(chain, pi, word) -> Fraction:
    """Forward algorithm on dense matrices."""
    P = dense(chain)
    n = len(P)
    v = [Fraction(pi[i]) if chain.labels[i] == word[0] else Fraction(0) for i in range(n)]
    for sym in word[1:]:
        v = [
            sum((v[i] * P[i][j] for i in range(n)), Fraction(0)) if chain.labels[j] == sym else Fraction(0)
            for j in range(n)
        ]
    return sum(v, Fraction(0))


def renewal_by_enumeration(chain, pi, s, depth: int) -> bool:
    """Past/future independence given ``X_0 = s`` for words of length ``depth``, by brute force."""
    laws = path_word_laws(chain, pi, 2 * depth + 1)
    ps = sum((Fraction(pi[i]) for i in range(len(chain)) if chain.labels[i] == s), Fraction(0))
    past: dict = {}
    fut: dict = {}
    joint: dict = {}
    for w, p in laws.items():
        if w[depth] != s:
            continue
        u, v = w[:depth], w[depth + 1:]
        past[u] = past.get(u, 0) + p
        fut[v] = fut.get(v, 0) + p
        joint[(u, v)] = joint.get((u, v), 0) + p
    return all(joint.get((u, v), 0) * ps == past[u] * fut[v] for u in past for v in fut)


def return_time_by_matrix(chain, pi, s, horizon: int) -> list[Fraction]:
    """``P(T = n | X_0 = s)`` by dense taboo matrix powers."""
    P = dense(chain)
    n = len(P)
    S = [i for i in range(n) if chain.labels[i] == s]
    ps = sum(Fraction(pi[i]) for i in S)
    v = [Fraction(pi[i]) / ps if i in S else Fraction(0) for i in range(n)]
    out = []
    for _ in range(horizon):
        w = [sum((v[i] * P[i][j] for i in range(n)), Fraction(0)) for j in range(n)]
        out.append(sum(w[j] for j in S))
        v = [0 if j in S else w[j] for j in range(n)]
    return out


def compound_by_convolution(g: list, mu, N: int) -> list:
    """``sum_k mu (1-mu)^(k-1) g^{*k}(n)`` for n = 1..N; g[0] is g(1)."""
    base = [Fraction(0)] + [Fraction(x) for x in g[:N]]
    base += [Fraction(0)] * (N + 1 - len(base))
    power = base[:]
    out = [Fraction(0)] * (N + 1)
    for k in range(1, N + 1):
        w = mu * (1 - mu) ** (k - 1)
        for n in range(N + 1):
            out[n] += w * power[n]
        # g^{*k}(n) vanishes for n < k, so only n >= k+1 can be nonzero in g^{*(k+1)}
        power = [
            sum((power[m] * base[n - m] for m in range(k, n)), Fraction(0)) if n > k else Fraction(0)
            for n in range(N + 1)
        ]
    return out[1:]


def renewal_hit_by_tree(f, k: int, steps: int) -> Fraction:
    """``P(Z_steps = 0 | Z_0 = k)`` by enumerating the binary renew/age tree; f is the raw hazard."""
    total = Fraction(0)
    for choices in itertools.product((0, 1), repeat=steps):
        age, p = k, Fraction(1)
        for renew in choices:
            h = f(age + 1)
            p *= h if renew else 1 - h
            age = 0 if renew else age + 1
        if choices[-1] == 1:
            total += p
    return total


def block_conditional_entropy(chain, pi, n: int) -> float:
    """``H(X_n | X_0..X_{n-1})`` in nats, from enumerated word laws of length n and n+1."""

    def H(laws):
        return -sum(float(p) * math.log(float(p)) for p in laws.values() if p)

    return H(path_word_laws(chain, pi, n + 1)) - H(path_word_laws(chain, pi, n))

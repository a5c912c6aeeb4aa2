"""Return times, hazard functions and renewal-state checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .chain import (
    ChainError,
    LabeledMarkovChain,
    Measure,
    Symbol,
    as_probability,
    stationary_vector,
)
from .report import Status, VerificationReport

NONE, GEOMETRIC, RESIDUAL = "none", "geometric", "residual"


@dataclass(frozen=True)
class ReturnTimeDistribution:
    """Law of an N-valued variable T, stored as ``p(1..K)`` plus a tail.

    ``tail`` is one of

    * ``"none"``: all mass sits in ``p(1..K)``;
    * ``"geometric"``: ``P(T=n) = tail_mass * f * (1-f)**(n-K-1)`` for n > K,
      with ``f = tail_hazard``;
    * ``"residual"``: ``tail_mass = P(T>K)`` is known, its shape is not.
    """

    pmf: tuple
    tail: str = NONE
    tail_mass: Any = 0
    tail_hazard: Any = None

    def __post_init__(self):
        pmf = tuple(self.pmf)
        object.__setattr__(self, "pmf", pmf)
        if self.tail not in (NONE, GEOMETRIC, RESIDUAL):
            raise ValueError(f"unknown tail kind {self.tail!r}")
        if any(p < 0 for p in pmf):
            raise ValueError("negative probability in pmf")
        total = sum(pmf) + self.tail_mass
        exact = all(isinstance(p, (Fraction, int)) for p in pmf + (self.tail_mass,))
        if exact and total != 1:
            raise ValueError(f"pmf plus tail mass is {total}, not 1")
        if not exact and abs(total - 1) > 1e-12:
            raise ValueError(f"pmf plus tail mass is {total!r}, not 1")
        if self.tail == NONE and self.tail_mass != 0:
            raise ValueError("bounded distribution cannot carry tail mass")
        if self.tail == GEOMETRIC:
            if self.tail_mass <= 0:
                raise ValueError("geometric tail needs positive tail mass")
            if self.tail_hazard is None or not 0 < self.tail_hazard < 1:
                raise ValueError("geometric tail hazard must lie in (0, 1)")
        if self.tail == NONE:
            k = len(pmf)
            while k and pmf[k - 1] == 0:
                k -= 1
            if k == 0:
                raise ValueError("empty support")
            object.__setattr__(self, "pmf", pmf[:k])

    # constructors ---------------------------------------------------------

    @classmethod
    def geometric(cls, p) -> "ReturnTimeDistribution":
        """``P(T=n) = p (1-p)^(n-1)``."""
        p = Fraction(p) if not isinstance(p, float) else p
        if p == 1:
            return cls((p,))
        return cls((), GEOMETRIC, p * 0 + 1, p)

    @classmethod
    def point_mass(cls, n: int) -> "ReturnTimeDistribution":
        return cls(tuple(Fraction(int(k == n)) for k in range(1, n + 1)))

    @classmethod
    def from_values(cls, values: Sequence, tail: str = NONE, tail_hazard=None, exact=True):
        pmf = tuple(as_probability(v, exact) for v in values)
        rest = (Fraction(1) if exact else 1.0) - sum(pmf)
        hz = as_probability(tail_hazard, exact) if tail_hazard is not None else None
        return cls(pmf, tail, rest if tail != NONE else rest * 0, hz).canonical()

    # queries --------------------------------------------------------------

    @property
    def K(self) -> int:
        return len(self.pmf)

    @property
    def exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for p in self.pmf + (self.tail_mass,))

    def prob(self, n: int):
        if n < 1:
            return self.tail_mass * 0
        if n <= self.K:
            return self.pmf[n - 1]
        if self.tail == NONE:
            return self.tail_mass * 0
        if self.tail == GEOMETRIC:
            f = self.tail_hazard
            return self.tail_mass * f * (1 - f) ** (n - self.K - 1)
        raise ValueError(f"P(T={n}) lies beyond the represented horizon {self.K}")

    def pmf_upto(self, n: int) -> list:
        return [self.prob(k) for k in range(1, n + 1)]

    def survival(self, n: int):
        """``P(T > n)``."""
        if n < self.K:
            return self.tail_mass + sum(self.pmf[n:])
        if self.tail == GEOMETRIC:
            return self.tail_mass * (1 - self.tail_hazard) ** (n - self.K)
        if self.tail == NONE:
            return self.tail_mass * 0
        if n == self.K:
            return self.tail_mass
        raise ValueError(f"P(T>{n}) lies beyond the represented horizon {self.K}")

    def mean(self):
        if self.tail == RESIDUAL and self.tail_mass:
            raise ValueError("mean undefined for an unresolved residual tail")
        m = sum(k * p for k, p in enumerate(self.pmf, 1))
        if self.tail == GEOMETRIC:
            m += self.tail_mass * (self.K + 1 / self.tail_hazard)
        return m

    def support(self) -> list[int]:
        return [k for k, p in enumerate(self.pmf, 1) if p]

    def is_unbounded(self) -> bool:
        return self.tail == GEOMETRIC

    def canonical(self) -> "ReturnTimeDistribution":
        """Shortest representation: fold pmf entries whose hazard equals the tail hazard."""
        if self.tail != GEOMETRIC:
            return self
        pmf = list(self.pmf)
        mass = self.tail_mass
        f = self.tail_hazard
        while pmf:
            above = mass + pmf[-1]
            if pmf[-1] != above * f:
                break
            mass = above
            pmf.pop()
        return ReturnTimeDistribution(tuple(pmf), GEOMETRIC, mass, f)

    def entropy(self, tol: float = 1e-15) -> float:
        """Shannon entropy of T in nats."""
        h = -sum(float(p) * math.log(p) for p in self.pmf if p)
        if self.tail == GEOMETRIC:
            q = float(self.tail_mass)
            f = float(self.tail_hazard)
            # mass q spread geometrically: H = -q log q + q * H_geom(f)
            h += -q * math.log(q) + q * (-(f * math.log(f) + (1 - f) * math.log(1 - f)) / f)
        elif self.tail == RESIDUAL and self.tail_mass:
            raise ValueError("entropy undefined for an unresolved residual tail")
        return h


@dataclass(frozen=True)
class HazardFunction:
    """``f(k) = P(T=k | T>=k)`` for k = 1..K, then ``tail`` for every k > K.

    ``tail is None`` means T is bounded and ``f(K) = 1``.
    """

    values: tuple
    tail: Any = None

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if any(not 0 <= v <= 1 for v in vals):
            raise ValueError("hazard values must lie in [0, 1]")
        if self.tail is None:
            if not vals or vals[-1] != 1:
                raise ValueError("bounded hazard must end with f(K) = 1")
            if any(v == 1 for v in vals[:-1]):
                raise ValueError("hazard hits 1 before its last value")
        else:
            if not 0 < self.tail < 1:
                raise ValueError("tail hazard must lie in (0, 1)")
            if any(v == 1 for v in vals):
                raise ValueError("hazard hits 1 but a tail is declared")

    @classmethod
    def constant(cls, p) -> "HazardFunction":
        return cls((), p)

    @classmethod
    def from_values(cls, values: Sequence, tail=None, exact=True) -> "HazardFunction":
        return cls(
            tuple(as_probability(v, exact) for v in values),
            as_probability(tail, exact) if tail is not None else None,
        )

    @property
    def K(self) -> int:
        return len(self.values)

    def __call__(self, k: int):
        if k < 1:
            raise ValueError("hazard is defined for k >= 1")
        if k <= self.K:
            return self.values[k - 1]
        if self.tail is None:
            raise ValueError(f"bounded hazard undefined beyond {self.K}")
        return self.tail


def hazard_from_pmf(T: ReturnTimeDistribution) -> HazardFunction:
    if T.tail == RESIDUAL:
        raise ValueError("residual tail carries no hazard beyond the horizon")
    vals = []
    at_least = T.tail_mass + sum(T.pmf)
    for k, p in enumerate(T.pmf, 1):
        if at_least == 0:
            raise ValueError(f"malformed pmf: P(T>={k}) = 0 before the mass is exhausted")
        vals.append(p / at_least)
        at_least -= p
    return HazardFunction(tuple(vals), T.tail_hazard if T.tail == GEOMETRIC else None)


def pmf_from_hazard(f: HazardFunction) -> ReturnTimeDistribution:
    one = f.tail * 0 + 1 if f.tail is not None else f.values[-1] * 0 + 1
    alive = one
    pmf = []
    for v in f.values:
        pmf.append(alive * v)
        alive *= 1 - v
    if f.tail is None:
        return ReturnTimeDistribution(tuple(pmf))
    return ReturnTimeDistribution(tuple(pmf), GEOMETRIC, alive, f.tail)


# ---------------------------------------------------------------------------


def _start_measure(chain: LabeledMarkovChain, s: Symbol) -> tuple[Measure, set[int]]:
    pi = stationary_vector(chain)
    idx = set(chain.with_label(s))
    ps = sum((pi[i] for i in idx), chain.zero)
    if not idx or ps == 0:
        raise ChainError(f"symbol {s!r} has zero stationary probability")
    return Measure.from_weights(chain, {i: pi[i] / ps for i in idx if pi[i]}), idx


def _proportional(a: Measure, b: Measure) -> bool:
    """Whether ``a`` is a positive multiple of ``b``."""
    if not a.num or not b.num or a.num.keys() != b.num.keys():
        return False
    sa, sb = sum(a.num.values()), sum(b.num.values())
    if a.chain.mode == "exact":
        return all(a.num[i] * sb == b.num[i] * sa for i in b.num)
    return all(abs(a.num[i] * sb - b.num[i] * sa) <= 1e-12 * abs(b.num[i] * sa) for i in b.num)


def return_time_distribution(
    chain: LabeledMarkovChain, s: Symbol, horizon: int = 200
) -> ReturnTimeDistribution:
    """First return time to label ``s`` started from the stationary law on ``s``.

    Taboo propagation runs up to ``horizon``. As soon as the no-return vector
    is an exact left eigenvector of the taboo matrix the tail is geometric and
    recorded as such. Otherwise the mass beyond the horizon is returned as a
    residual.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    start, s_idx = _start_measure(chain, s)
    u = start
    pmf = []
    prev = None
    for n in range(1, horizon + 1):
        nxt = u.step()
        pmf.append(nxt.mass(s_idx))
        u = Measure(chain, {i: v for i, v in nxt.num.items() if i not in s_idx}, nxt.den)
        if n % 16 == 0:
            u = u.reduced()
        if not u.num or u.mass() == 0:
            return ReturnTimeDistribution(tuple(pmf))
        if prev is not None and _proportional(u, prev):
            # prev is an eigenvector: geometric from index n - 1
            lam = u.mass() / prev.mass()
            tail_mass = prev.mass()
            return ReturnTimeDistribution(tuple(pmf[:-1]), GEOMETRIC, tail_mass, 1 - lam).canonical()
        prev = u
    return ReturnTimeDistribution(tuple(pmf), RESIDUAL, u.mass())


def renewal_word_probability(chain: LabeledMarkovChain, s: Symbol):
    """``P(X_0 = s)``."""
    pi = stationary_vector(chain)
    return sum((pi[i] for i in chain.with_label(s)), chain.zero)


# ---------------------------------------------------------------------------
# renewal verification


def _past_vectors(chain, s_idx, depth):
    """``P(X_{-d..-1} = u, H_0 = h)`` for h labelled s, one entry per positive word u."""
    pi = stationary_vector(chain)
    by_label: dict = {}
    for i, lab in enumerate(chain.labels):
        by_label.setdefault(lab, set()).add(i)
    out = {}

    def walk(word, m: Measure):
        if len(word) == depth:
            v = m.step().restrict(s_idx)
            if v.num:
                out[word] = v.weights()
            return
        nxt = m.step()
        for lab, idx in by_label.items():
            r = nxt.restrict(idx)
            if r.num and any(r.num.values()):
                walk(word + (lab,), r)

    for lab, idx in by_label.items():
        w = {i: pi[i] for i in idx if pi[i]}
        if w:
            walk((lab,), Measure.from_weights(chain, w))
    return out


def _future_vectors(chain, s_idx, depth):
    """``P(X_{1..d} = v | H_0 = h)`` for h labelled s, per positive word v."""
    by_label: dict = {}
    for i, lab in enumerate(chain.labels):
        by_label.setdefault(lab, set()).add(i)
    # forward tree from each s-state simultaneously: track per start state
    out: dict = {}
    zero = chain.zero

    def walk(word, dists: dict):
        if len(word) == depth:
            out[word] = {h: m for h, m in dists.items()}
            return
        stepped = {h: m.step() for h, m in dists.items()}
        for lab, idx in by_label.items():
            nxt = {h: m.restrict(idx) for h, m in stepped.items()}
            if any(m.num and any(m.num.values()) for m in nxt.values()):
                walk(word + (lab,), nxt)

    one = chain.one
    walk((), {h: Measure.from_weights(chain, {h: one}) for h in s_idx})
    return {w: {h: m.mass() for h, m in d.items()} for w, d in out.items()}


def verify_renewal_state(chain: LabeledMarkovChain, s: Symbol, depth: int = 3) -> VerificationReport:
    """Check past/future independence given ``X_0 = s`` for label words of length ``depth``.

    Words of exactly length ``depth`` suffice: shorter words are marginals.
    A PASS is a necessary condition at this depth, not a proof of renewal.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    pi = stationary_vector(chain)
    s_idx = {i for i in chain.with_label(s) if pi[i]}
    if not s_idx:
        raise ChainError(f"symbol {s!r} has zero stationary probability")
    ps = sum(pi[i] for i in s_idx)
    past = _past_vectors(chain, s_idx, depth)
    fut = _future_vectors(chain, s_idx, depth)
    start = {h: pi[h] for h in s_idx}
    fut_marg = {v: sum(start[h] * b[h] for h in s_idx) for v, b in fut.items()}
    exact = chain.mode == "exact"
    checked = 0
    for u, a in past.items():
        au = sum(a.values())
        for v, b in fut.items():
            joint = sum(a[h] * b[h] for h in a)
            lhs = joint * ps
            rhs = au * fut_marg[v]
            checked += 1
            bad = lhs != rhs if exact else abs(lhs - rhs) > 1e-12
            if bad:
                return VerificationReport(
                    f"renewal_state[{s!r}, depth={depth}]",
                    Status.FAIL,
                    lhs=joint / ps,
                    rhs=(au / ps) * (fut_marg[v] / ps),
                    witness={"past": list(u), "future": list(v)},
                    note="P(past,future|s) != P(past|s) P(future|s)",
                )
    return VerificationReport(
        f"renewal_state[{s!r}, depth={depth}]",
        Status.PASS,
        witness={"pairs_checked": checked},
        note=f"necessary condition at depth {depth}",
    )

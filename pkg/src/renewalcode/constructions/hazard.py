"""The age chain Z of a renewal process and the acceptance rates alpha."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from ..chain import ChainError, LabeledMarkovChain, Measure, Unifilar, stationary_vector
from ..renewal import HazardFunction, ReturnTimeDistribution, hazard_from_pmf


class AlphaError(ChainError):
    """Some acceptance rate would exceed one: the (k0, c) pair is unusable."""


@dataclass(frozen=True)
class HazardChain:
    """Age since the last renewal, with ages ``>= lump_K`` merged into one state.

    Hidden states are the ints ``0 .. lump_K``; the last one stands for every
    age ``k >= lump_K``. From age k the chain renews (goes to 0) with
    probability ``f(k+1)`` and otherwise ages by one. The merge is exact
    because the hazard is already constant beyond ``lump_K``.
    For a bounded return time ``lump_K`` is None and the ages stop at ``K-1``.
    """

    f: HazardFunction
    lump_K: int | None
    chain: LabeledMarkovChain

    @property
    def lump(self) -> int | None:
        return self.lump_K

    def ages(self) -> range:
        return range(len(self.chain))

    def renewal_view(self, s="s", star="*") -> LabeledMarkovChain:
        """The renewal process itself: label ``s`` at age 0 and ``star`` elsewhere.

        Reading labels recovers the age exactly (capped at the lump), so the
        view is unifilar.
        """
        return self.chain.relabel(
            lambda z: s if z == 0 else star, certificate=Unifilar("age is the time since the last s")
        )

    @cached_property
    def stationary(self) -> tuple:
        return stationary_vector(self.chain)

    def renewal_within(self, k: int, steps: int) -> Fraction:
        """``P(Z_steps = 0 | Z_0 = k)`` by exact propagation."""
        m = Measure.from_weights(self.chain, {k: Fraction(1)})
        for _ in range(steps):
            m = m.step()
        return m.mass({0})


def build_hazard_chain(
    f: HazardFunction | ReturnTimeDistribution, lump_K: int | None = None
) -> HazardChain:
    """Age chain for hazard ``f`` (or for the hazard of a return-time law).

    ``lump_K`` defaults to the length of the explicit hazard window (at least 1)
    and may be any larger value; it must not be smaller.
    """
    if isinstance(f, ReturnTimeDistribution):
        f = hazard_from_pmf(f)
    if f.tail is None:
        if lump_K is not None:
            raise ValueError("a bounded return time has no tail to lump")
        n = f.K
        rows = []
        for k in range(n):
            h = f(k + 1)
            row = {0: h}
            if k + 1 < n and h != 1:
                row[k + 1] = 1 - h
            rows.append(row)
        surv = [Fraction(1)]
        for k in range(1, n):
            surv.append(surv[-1] * (1 - f(k)))
        tot = sum(surv)
        chain = LabeledMarkovChain(list(range(n)), rows, list(range(n)), stationary=[x / tot for x in surv])
        return HazardChain(f, None, chain)
    lump = max(f.K, 1) if lump_K is None else lump_K
    if lump < max(f.K, 1):
        raise ValueError(f"lump_K={lump} is below the hazard window {f.K}")
    if f.tail <= 0 or any(f(k) == 1 for k in range(1, lump + 1)):
        raise ValueError("hazard chain needs an unbounded return time")
    rows = []
    for k in range(lump):
        h = f(k + 1)
        rows.append({0: h, k + 1: 1 - h})
    rows.append({0: f.tail, lump: 1 - f.tail})
    # P(Z=k) proportional to P(T > k); the lump collects a geometric sum
    surv = [Fraction(1)]
    for k in range(1, lump + 1):
        surv.append(surv[-1] * (1 - f(k)))
    weights = surv[:-1] + [surv[-1] / f.tail]
    tot = sum(weights)
    chain = LabeledMarkovChain(
        list(range(lump + 1)), rows, list(range(lump + 1)), stationary=[w / tot for w in weights]
    )
    return HazardChain(f, lump, chain)


@dataclass(frozen=True)
class AlphaSequence:
    """Acceptance rates ``alpha_k = constant / P(Z_k0 = 0 | Z_0 = k)``."""

    values: tuple
    hit_probs: tuple
    constant: Fraction
    k0: int

    def __getitem__(self, k: int) -> Fraction:
        return self.values[min(k, len(self.values) - 1)]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def compute_alpha(Z: HazardChain, k0: int, c, constant=None) -> AlphaSequence:
    """Rates that equalize ``alpha_k P(Z_k0 = 0 | Z_0 = k)`` across all ages.

    Parameters
    ----------
    Z : HazardChain
    k0 : int
        Offset of the renewal being flagged.
    c : Fraction
        Hazard margin; the default normalizing constant is ``c**k0``.
    constant : Fraction, optional
        Any other positive constant no larger than every hit probability.

    Raises
    ------
    AlphaError
        If some ``alpha_k`` exceeds one. For ``k >= k0 - 1`` the hit
        probability is at least ``P(T = k + k0 | T > k) >= c**k0``, so this
        can only happen at small ages.
    """
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    c = Fraction(c)
    const = c**k0 if constant is None else Fraction(constant)
    if const <= 0:
        raise ValueError("normalizing constant must be positive")
    hits = tuple(Z.renewal_within(k, k0) for k in Z.ages())
    values = []
    for k, p in enumerate(hits):
        if p == 0 or const > p:
            raise AlphaError(
                f"alpha_{k} = {const}/{p} exceeds 1; choose a larger k0 or smaller c"
            )
        values.append(const / p)
    return AlphaSequence(tuple(values), hits, const, k0)

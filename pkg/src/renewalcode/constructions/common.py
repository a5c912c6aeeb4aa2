from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..chain import ChainError, LabeledMarkovChain, Symbol, symbol_probability
from ..entropy import EntropyValue, entropy_rate
from ..report import VerificationReport, to_jsonable
from ..transforms import SplitDistribution, independent_split, symbol_names

ENTROPY_MATCH_TOL = 1e-9
SPLIT_DENOMINATOR = 10**9


class PipelineError(ChainError):
    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class LedgerEntry:
    stage: str
    value: EntropyValue
    compared_to: EntropyValue | None = None
    relation: str = ""

    @property
    def margin(self) -> float | None:
        if self.compared_to is None:
            return None
        return self.compared_to.value - self.value.value

    def to_dict(self) -> dict:
        out = {"stage": self.stage, "value": self.value.value, "error": self.value.error}
        if self.compared_to is not None:
            out.update(relation=self.relation, compared_to=self.compared_to.value, margin=self.margin)
        return out


@dataclass
class PipelineWitness:
    steps: list = field(default_factory=list)
    checks: list[VerificationReport] = field(default_factory=list)
    entropy_ledger: list[LedgerEntry] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict, repr=False)

    def step(self, name: str, **summary):
        self.steps.append((name, summary))

    def check(self, report: VerificationReport) -> VerificationReport:
        self.checks.append(report)
        return report

    def ledger(self, stage, value, compared_to=None, relation=""):
        self.entropy_ledger.append(LedgerEntry(stage, value, compared_to, relation))

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.checks)

    def to_dict(self) -> dict:
        return {
            "steps": [{"step": n, **to_jsonable(s)} for n, s in self.steps],
            "checks": [r.to_dict() for r in self.checks],
            "entropy_ledger": [e.to_dict() for e in self.entropy_ledger],
        }


def _family_entropy(x: float, m: int) -> float:
    # weights (1-x, x/(m-1), ..., x/(m-1))
    if x <= 0:
        return 0.0
    h = -x * math.log(x / (m - 1))
    if x < 1:
        h -= (1 - x) * math.log(1 - x)
    return h


def split_to_entropy(
    chain: LabeledMarkovChain, star: Symbol, target: EntropyValue | float, name=None
) -> tuple[LabeledMarkovChain, SplitDistribution | None]:
    """Independently split ``star`` so that the entropy rate reaches ``target``.

    Uses the smallest symbol count m with ``P(star) log m`` above the deficit
    and weights ``(1-x, x/(m-1), ...)``, x found by bisection and then
    rounded to a rational with denominator at most 1e9.
    """
    target = float(target)
    have = entropy_rate(chain).value
    deficit = target - have
    if deficit < -ENTROPY_MATCH_TOL:
        raise PipelineError("split cannot lower entropy", {"have": have, "target": target})
    if abs(deficit) <= 1e-13:
        return chain, None
    ps = float(symbol_probability(chain, star))
    need = deficit / ps
    m = 2
    while math.log(m) < need:
        m += 1
        if m > 10**6:
            raise PipelineError("entropy deficit too large to split", {"deficit": deficit})
    lo, hi = 0.0, (m - 1) / m
    for _ in range(200):
        mid = (lo + hi) / 2
        if _family_entropy(mid, m) < need:
            lo = mid
        else:
            hi = mid
    x = Fraction((lo + hi) / 2).limit_denominator(SPLIT_DENOMINATOR)
    weights = (1 - x,) + (x / (m - 1),) * (m - 1)
    split = SplitDistribution(symbol_names(name if name is not None else star, m, chain.alphabet), weights)
    return independent_split(chain, star, split), split


def strictly_below(low: EntropyValue, high: EntropyValue) -> bool:
    """``low < high`` with both error bars accounted for."""
    return low.value + low.error < high.value - high.error

"""Structured pass/fail records for exact and statistical checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INDETERMINATE = "INDETERMINATE"


@dataclass
class VerificationReport:
    """Outcome of one check.

    Exact checks leave ``seed`` as None and ``tolerance`` as 0. A FAIL must
    carry a witness, and a stochastic check must carry its seed.
    """

    check_name: str
    status: Status
    lhs: Any = None
    rhs: Any = None
    tolerance: Any = 0
    witness: dict = field(default_factory=dict)
    seed: int | None = None
    note: str = ""

    def __post_init__(self):
        self.status = Status(self.status)
        if self.status is Status.FAIL and not self.witness:
            raise ValueError(f"FAIL report {self.check_name!r} needs a witness")

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        out = {
            "check": self.check_name,
            "status": self.status.value,
            "lhs": to_jsonable(self.lhs),
            "rhs": to_jsonable(self.rhs),
            "tolerance": to_jsonable(self.tolerance),
            "witness": to_jsonable(self.witness),
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.note:
            out["note"] = self.note
        return out

    def line(self) -> str:
        text = f"[{self.status.value:<13}] {self.check_name}"
        if self.note:
            text += f" -- {self.note}"
        return text


def to_jsonable(value: Any) -> Any:
    """Fractions become ``"num/den"`` strings; containers are walked."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {_key(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (frozenset, set)):
        return sorted((to_jsonable(v) for v in value), key=repr)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return repr(value)


def _key(k: Any) -> str:
    return k if isinstance(k, str) else repr(k)


def combine(name: str, reports: list[VerificationReport], note: str = "") -> VerificationReport:
    """Fold several reports into one; FAIL dominates INDETERMINATE dominates PASS."""
    statuses = {r.status for r in reports}
    if Status.FAIL in statuses:
        status = Status.FAIL
    elif Status.INDETERMINATE in statuses:
        status = Status.INDETERMINATE
    else:
        status = Status.PASS
    witness = {"parts": [r.to_dict() for r in reports if not r.passed]} if status is not Status.PASS else {}
    return VerificationReport(name, status, witness=witness, note=note or f"{len(reports)} sub-checks")


def dump_reports(reports: list[VerificationReport], path) -> None:
    with open(path, "w") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)

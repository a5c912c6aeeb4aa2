"""Exponential, regular and semi-regular tails; the geometric compound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .renewal import GEOMETRIC, NONE, RESIDUAL, HazardFunction, ReturnTimeDistribution
from .report import Status

C_DENOMINATOR_CAP = 1000
RATIO_THRESHOLD = 1e-6


class TailCertificationError(ValueError):
    """A tail property could not be certified; ``diagnostics`` says why."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotSemiRegular(TailCertificationError):
    pass


def _log(x) -> float:
    """Natural log of a positive Fraction of any size."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


@dataclass(frozen=True)
class TailFit:
    """``P(T=n) = C e^{-cn} +- residual_bound e^{-bn}`` over ``window``.

    ``b is None`` when the residuals vanish identically.
    """

    C: float
    c: float
    b: float | None
    residual_bound: float
    horizon: int
    window: tuple[int, int]
    ratio_spread: float = 0.0
    exact_ratio: Fraction | None = None

    @property
    def exactly_geometric(self) -> bool:
        return self.b is None and self.residual_bound == 0


@dataclass(frozen=True)
class SemiRegularParams:
    c: Fraction
    k0: int


@dataclass(frozen=True)
class CompoundParams:
    mu: Fraction

    def __post_init__(self):
        if not 0 < self.mu < 1:
            raise ValueError("mu must lie in (0, 1)")


@dataclass(frozen=True)
class ExponentialTail:
    status: Status
    C: float | Fraction | None = None
    c: float | None = None
    witness: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------


def support_gcd(T: ReturnTimeDistribution) -> int:
    """gcd of the support. A geometric tail covers consecutive integers, so it forces 1.

    For a residual tail only the represented support is used.
    """
    sup = T.support()
    if T.tail == GEOMETRIC:
        sup += [T.K + 1, T.K + 2]
    if not sup:
        raise ValueError("empty support")
    return math.gcd(*sup)


def exponential_tail_check(T: ReturnTimeDistribution) -> ExponentialTail:
    """Find C, c with ``P(T>n) <= C e^{-cn}`` for all n >= 0.

    Geometric tails give ``c = -log(1-f)`` and an exact C. Bounded laws pass
    trivially. Residual tails are judged from survival ratios inside the
    horizon; a local decay rate that keeps shrinking is INDETERMINATE.
    """
    if T.tail == NONE:
        c = 1.0
        C = max(float(T.survival(n)) * math.exp(c * n) for n in range(T.K + 1))
        return ExponentialTail(Status.PASS, C, c, {"bounded_by": T.K})
    if T.tail == GEOMETRIC:
        keep = 1 - T.tail_hazard
        C = max(T.survival(n) / keep**n for n in range(T.K + 1))
        return ExponentialTail(Status.PASS, C, -_log(keep), {"tail_hazard": T.tail_hazard})
    N = T.K
    surv = [T.survival(n) for n in range(N + 1)]
    lo = N // 2
    if surv[N] == 0:
        return ExponentialTail(Status.PASS, 1.0, 1.0, {"note": "no mass beyond horizon"})
    ratios = [surv[n + 1] / surv[n] for n in range(lo, N)]
    rates = [-_log(r) for r in ratios]
    witness = {
        "ratio_start": float(ratios[0]),
        "ratio_end": float(ratios[-1]),
        "rate_start": rates[0],
        "rate_end": rates[-1],
    }
    if rates[-1] <= 0.75 * rates[0]:
        return ExponentialTail(Status.INDETERMINATE, witness=witness)
    c = min(rates)
    C = max(float(surv[n]) * math.exp(c * n) for n in range(N + 1))
    return ExponentialTail(Status.PASS, C, c, witness)


def regular_tail_certify(
    q: Sequence,
    window: tuple[int, int] | None = None,
    threshold: float = RATIO_THRESHOLD,
    chunk: int = 10,
) -> TailFit:
    """Certify ``q(n) = C e^{-cn} +- O(e^{-bn})`` with ``b > c`` on a finite window.

    ``q[0]`` is ``q(1)``. The dominant ratio is read at the end of the window
    and checked for convergence over the window's second half; the residual
    rate ``b`` is fitted to per-chunk maxima of ``log|r(n)|`` over the first
    half, where the error in the ratio estimate is negligible. This is a
    numerical certificate over the window, not a proof.
    """
    q = [x if isinstance(x, Fraction) else Fraction(x) for x in q]
    N = len(q)
    lo, hi = window if window is not None else (N // 2, N)
    if not 1 <= lo < hi <= N or hi - lo < 4 * chunk:
        raise ValueError(f"window ({lo}, {hi}) unusable for horizon {N}")
    val = lambda n: q[n - 1]  # noqa: E731
    zeros = [n for n in range(lo, hi + 1) if val(n) <= 0]
    if zeros:
        raise TailCertificationError("q(n) vanishes inside the window", {"zero_at": zeros[:10]})
    ratios = {n: val(n + 1) / val(n) for n in range(lo, hi)}
    rho = ratios[hi - 1]
    mid = (lo + hi) // 2
    spread = max(abs(float(ratios[n] / rho - 1)) for n in range(mid, hi))
    if spread > threshold:
        raise TailCertificationError(
            "tail ratios do not converge",
            {"ratio_spread": spread, "threshold": threshold, "ratio_end": float(rho)},
        )
    c = -_log(rho)
    if all(r == rho for r in ratios.values()):
        C = val(hi) / rho**hi
        return TailFit(float(C), c, None, 0.0, N, (lo, hi), 0.0, rho)
    # residuals sit up to e^{-(b-c)n} below q(n); carry enough digits to see them
    with mpmath.workdps(N + 50):
        mq = {n: mpmath.mpf(val(n).numerator) / val(n).denominator for n in range(lo, hi + 1)}
        mrho = mpmath.mpf(rho.numerator) / rho.denominator
        C = mq[hi] / mrho**hi
        resid = {n: mq[n] - C * mrho**n for n in range(lo, hi + 1)}
        logr = {n: float(mpmath.log(abs(r))) for n, r in resid.items() if r != 0}
    points = []
    for start in range(lo, mid, chunk):
        cand = [(n, logr[n]) for n in range(start, min(start + chunk, mid)) if n in logr]
        if cand:
            points.append(max(cand, key=lambda t: t[1]))
    if len(points) < 3:
        raise TailCertificationError("too few nonzero residuals to fit a rate", {"points": len(points)})
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    b = -slope
    diag = {"c": c, "b": b, "ratio_spread": spread}
    if not b > c:
        raise TailCertificationError("residual rate does not exceed the dominant rate", diag)
    log_bound = max(lr + b * n for n, lr in logr.items())
    return TailFit(float(C), c, b, math.exp(log_bound), N, (lo, hi), spread, rho)


def semi_regular_params(f: HazardFunction, cap: int = C_DENOMINATOR_CAP) -> SemiRegularParams:
    """Smallest k0 and a rational c <= 1/2 with ``f(k) in [c, 1-c]`` for all k >= k0.

    A leading hazard value is dropped when it is strictly worse than every
    value after it; the first value that is not is k0. c is the largest
    rational with denominator at most ``cap`` not exceeding the attained bound.
    """
    if f.tail is None:
        raise NotSemiRegular("return time is bounded", {"K": f.K})
    if not 0 < f.tail < 1:
        raise NotSemiRegular("tail hazard outside (0, 1)", {"tail": f.tail})
    margins = [min(v, 1 - v) for v in f.values] + [min(f.tail, 1 - f.tail)]
    suffix = margins[:]
    for k in range(len(suffix) - 2, -1, -1):
        suffix[k] = min(margins[k], suffix[k + 1])
    k0 = len(margins)
    for k in range(len(margins) - 1):
        if margins[k] >= suffix[k + 1]:
            k0 = k + 1
            break
    bound = min(suffix[k0 - 1], Fraction(1, 2))
    c = best_rational_below(Fraction(bound), cap)
    if c <= 0:
        raise NotSemiRegular("hazard margin below the rational grid", {"bound": bound})
    return SemiRegularParams(c, k0)


def best_rational_below(x: Fraction, cap: int) -> Fraction:
    if x.denominator <= cap:
        return x
    return max(Fraction(math.floor(x * d), d) for d in range(1, cap + 1))


# ---------------------------------------------------------------------------


def geometric_compound(T: ReturnTimeDistribution, mu, N: int) -> list:
    """``P(T_1 + ... + T_G = n)`` for n = 1..N, G ~ Geom(mu) on {1, 2, ...}.

    Exact renewal recursion ``q = mu g + (1-mu) g * q``.
    """
    mu = mu.mu if isinstance(mu, CompoundParams) else mu
    if not 0 < mu < 1:
        raise ValueError("mu must lie in (0, 1)")
    sup = T.support() or [T.K + 1]
    if N < min(sup):
        raise ValueError(f"horizon {N} below the minimum support {min(sup)}")
    g = T.pmf_upto(N)
    nz = [(m, g[m - 1]) for m in range(1, N + 1) if g[m - 1]]
    keep = 1 - mu
    scaled = [(m, keep * p) for m, p in nz]
    q = [None] * (N + 1)
    for n in range(1, N + 1):
        acc = mu * g[n - 1]
        for m, p in scaled:
            if m >= n:
                break
            acc += p * q[n - m]
        q[n] = acc
    return q[1:]


@dataclass
class SweepEntry:
    mu: Fraction
    fit: TailFit | None
    error: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.fit is not None


def mu_sweep(T: ReturnTimeDistribution, grid: Sequence, N: int, **certify_kw) -> list[SweepEntry]:
    if not grid:
        raise ValueError("empty mu grid")
    out = []
    for mu in grid:
        q = geometric_compound(T, mu, N)
        try:
            out.append(SweepEntry(mu, regular_tail_certify(q, **certify_kw)))
        except TailCertificationError as exc:
            out.append(SweepEntry(mu, None, str(exc), exc.diagnostics))
    return out


def largest_certified(entries: Sequence[SweepEntry]):
    ok = [e.mu for e in entries if e.certified]
    return max(ok) if ok else None

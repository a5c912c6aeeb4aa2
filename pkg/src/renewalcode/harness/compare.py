"""Exact laws against Monte Carlo samples."""

from __future__ import annotations

import math
from collections import Counter
from typing import Callable, Iterable, Mapping, Sequence

from scipy import stats

from ..report import Status, VerificationReport

DEFAULT_TV = 0.01
DEFAULT_CHI2_ALPHA = 1e-4
MIN_EXPECTED = 5.0


def return_times(sample: Sequence, symbol) -> list[int]:
    """Gaps between consecutive occurrences of ``symbol``."""
    hits = [n for n, x in enumerate(sample) if x == symbol]
    return [b - a for a, b in zip(hits, hits[1:])]


def indicator(symbol) -> Callable[[Sequence], Iterable]:
    return lambda sample: (x == symbol for x in sample)


def empirical_compare(
    exact: Mapping,
    sample: Sequence,
    extractor: Callable[[Sequence], Iterable] | None = None,
    name: str = "empirical_compare",
    tv_threshold: float = DEFAULT_TV,
    chi2_alpha: float | None = DEFAULT_CHI2_ALPHA,
    seed: int | None = None,
) -> VerificationReport:
    """Total variation and chi-square between an exact law and observed events.

    Parameters
    ----------
    exact : mapping
        Event -> probability. Mass not listed (a truncated tail) is pooled
        with rare events into one bin.
    sample : sequence
        Raw sample; ``extractor`` turns it into the observed events
        (identity by default).
    chi2_alpha : float or None
        Significance of the chi-square test; ``None`` gates on TV only, which
        suits strongly dependent samples.
    """
    events = list(extractor(sample)) if extractor else list(sample)
    if not events:
        raise ValueError("empty sample")
    n = len(events)
    counts = Counter(events)
    probs = {e: float(p) for e, p in exact.items()}
    support = set(probs) | set(counts)
    tv = 0.5 * sum(abs(counts.get(e, 0) / n - probs.get(e, 0.0)) for e in support)
    impossible = [e for e in counts if probs.get(e, 0.0) == 0.0 and e in probs]
    obs, exp, pool_o, pool_e = [], [], 0, 0.0
    for e in sorted(probs, key=repr):
        if probs[e] * n >= MIN_EXPECTED:
            obs.append(counts.get(e, 0))
            exp.append(probs[e] * n)
        else:
            pool_o += counts.get(e, 0)
            pool_e += probs[e] * n
    pool_o += sum(c for e, c in counts.items() if e not in probs)
    pool_e += max(0.0, n - sum(probs.values()) * n)
    if pool_e >= MIN_EXPECTED or (pool_o and pool_e > 0):
        obs.append(pool_o)
        exp.append(pool_e)
    if len(obs) > 1:
        scale = sum(obs) / sum(exp)
        chi2, pvalue = stats.chisquare(obs, [x * scale for x in exp])
        chi2, pvalue = float(chi2), float(pvalue)
    else:
        chi2, pvalue = 0.0, 1.0
    ok = tv <= tv_threshold and not impossible
    if chi2_alpha is not None:
        ok = ok and pvalue >= chi2_alpha
    witness = {"tv": tv, "chi2": chi2, "pvalue": pvalue, "samples": n, "bins": len(obs)}
    if impossible:
        witness["impossible_events"] = impossible[:10]
    return VerificationReport(
        name,
        Status.PASS if ok else Status.FAIL,
        lhs=tv,
        rhs=tv_threshold,
        tolerance=tv_threshold,
        witness=witness,
        seed=seed,
        note=f"TV={tv:.3g}, chi2 p={pvalue:.3g}",
    )


def conditional_rate(sample: Sequence, symbol, lag: int) -> tuple[float, int]:
    """Empirical ``P(X_lag = symbol | X_0 = symbol)`` and the number of conditioning sites."""
    hits = [n for n, x in enumerate(sample) if x == symbol and n + lag < len(sample)]
    if not hits:
        return math.nan, 0
    good = sum(1 for n in hits if sample[n + lag] == symbol)
    return good / len(hits), len(hits)


def binomial_check(
    name: str, estimate: float, trials: int, exact: float, sigmas: float = 3.0, seed: int | None = None
) -> VerificationReport:
    """``|estimate - exact|`` within ``sigmas`` binomial standard errors."""
    if trials == 0:
        return VerificationReport(name, Status.INDETERMINATE, estimate, exact, seed=seed, note="no trials")
    se = math.sqrt(max(exact * (1 - exact), 1e-300) / trials)
    dev = abs(estimate - exact)
    ok = dev <= sigmas * se
    return VerificationReport(
        name,
        Status.PASS if ok else Status.FAIL,
        lhs=estimate,
        rhs=exact,
        tolerance=sigmas * se,
        witness={"trials": trials, "standard_error": se, "z": dev / se},
        seed=seed,
    )

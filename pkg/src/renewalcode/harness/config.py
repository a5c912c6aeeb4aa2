"""JSON configs: chain declarations plus a list of checks to run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from ..chain import ChainError, LabeledMarkovChain, as_probability, stationary_vector
from ..constructions import (
    build_marker_construction,
    prop1_pipeline,
    prop2_pipeline,
    verify_age_independence,
    verify_b_probability,
    verify_marker_independence,
)
from ..constructions import demos
from ..renewal import HazardFunction, return_time_distribution, verify_renewal_state
from ..report import Status, VerificationReport, dump_reports
from ..tails import (
    TailCertificationError,
    exponential_tail_check,
    geometric_compound,
    regular_tail_certify,
)
from ..transforms import product_with_iid_mark
from .compare import (
    DEFAULT_CHI2_ALPHA,
    DEFAULT_TV,
    binomial_check,
    conditional_rate,
    empirical_compare,
    return_times,
)
from .sampling import SampleSpec, sample_path

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class Context:
    chains: dict[str, LabeledMarkovChain]
    thresholds: dict = field(default_factory=dict)

    def chain(self, spec: dict) -> LabeledMarkovChain:
        return self.chains[spec["chain"]]

    @property
    def tv(self) -> float:
        return float(self.thresholds.get("tv", DEFAULT_TV))

    @property
    def chi2_alpha(self):
        return self.thresholds.get("chi2_alpha", DEFAULT_CHI2_ALPHA)


# ---------------------------------------------------------------------------
# parsing


def load_config(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return cfg


def _fraction(x) -> Fraction:
    return as_probability(x) if not isinstance(x, (int, Fraction)) else Fraction(x)


def build_chain(name: str, spec: dict) -> LabeledMarkovChain:
    """Chain from ``{"transitions": ..., "labels": ...}``, ``{"hazard": ...}`` or ``{"demo": ...}``."""
    try:
        if "demo" in spec:
            factory = {
                "constant_hazard": demos.constant_hazard_chain,
                "alternating_hazard": demos.alternating_hazard_chain,
                "pair_renewal": demos.pair_renewal_chain,
            }.get(spec["demo"])
            if factory is None:
                raise ConfigError(f"chain {name!r}: unknown demo {spec['demo']!r}")
            return factory()
        if "hazard" in spec:
            f = HazardFunction.from_values(
                [_fraction(v) for v in spec["hazard"]],
                tail=None if spec.get("tail") is None else _fraction(spec["tail"]),
            )
            return demos.hazard_renewal_chain(f, tuple(spec.get("letters", ("a", "b"))), spec.get("renewal", "s"))
        if "transitions" in spec:
            return LabeledMarkovChain.from_dict(
                spec["transitions"], labels=spec.get("labels"), exact=spec.get("exact", True)
            )
    except (ChainError, ValueError, TypeError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"chain {name!r}: {exc}") from None
    raise ConfigError(f"chain {name!r}: needs 'transitions', 'hazard' or 'demo'")


# ---------------------------------------------------------------------------
# checks


def _renewal_state(ctx, spec):
    return [verify_renewal_state(ctx.chain(spec), spec["symbol"], int(spec.get("depth", 3)))]


def _exponential_tail(ctx, spec):
    T = return_time_distribution(ctx.chain(spec), spec["symbol"], int(spec.get("horizon", 400)))
    res = exponential_tail_check(T)
    return [
        VerificationReport(
            f"exponential_tail[{spec['symbol']}]",
            res.status,
            lhs=res.C,
            rhs=res.c,
            witness={"tail": T.tail, **res.witness},
        )
    ]


def _compound_law(ctx, spec):
    X, s = ctx.chain(spec), spec["symbol"]
    mu, N = _fraction(spec["mu"]), int(spec.get("horizon", 200))
    q = geometric_compound(return_time_distribution(X, s, N), mu, N)
    law = return_time_distribution(product_with_iid_mark(X, mu), (s, 1), N).pmf_upto(N)
    bad = next((n for n in range(N) if law[n] != q[n]), None)
    status = Status.PASS if bad is None else Status.FAIL
    return [
        VerificationReport(
            "compound_law",
            status,
            lhs=law[bad if bad is not None else N - 1],
            rhs=q[bad if bad is not None else N - 1],
            witness={"horizon": N} if bad is None else {"n": bad + 1},
        )
    ]


def _regular_tail(ctx, spec):
    T = return_time_distribution(ctx.chain(spec), spec["symbol"], int(spec.get("horizon", 400)))
    N = int(spec.get("horizon", 400))
    out = []
    for mu in spec["mu_grid"]:
        mu = _fraction(mu)
        q = geometric_compound(T, mu, N)
        window = tuple(spec["window"]) if "window" in spec else None
        try:
            fit = regular_tail_certify(q, window=window)
            out.append(
                VerificationReport(
                    f"regular_tail[mu={mu}]",
                    Status.PASS,
                    lhs=fit.b,
                    rhs=fit.c,
                    witness={"C": fit.C, "residual_bound": fit.residual_bound, "window": fit.window},
                )
            )
        except TailCertificationError as exc:
            out.append(
                VerificationReport(
                    f"regular_tail[mu={mu}]",
                    Status.INDETERMINATE,
                    witness={"reason": str(exc), **exc.diagnostics},
                )
            )
    return out


def _marker(ctx, spec):
    X, M = build_marker_construction(ctx.chain(spec), spec["symbol"], _fraction(spec["epsilon"]))
    n_max = M.k0 + int(spec.get("extra", 40))
    return [verify_b_probability(X, M), verify_marker_independence(X, M, n_max), verify_age_independence(X, M)]


def _prop1(ctx, spec):
    _, W = prop1_pipeline(
        ctx.chain(spec), spec["s1"], spec["s2"], [_fraction(m) for m in spec["mu_grid"]], int(spec.get("depth", 3))
    )
    return W.checks


def _prop2(ctx, spec):
    _, W = prop2_pipeline(
        ctx.chain(spec), spec["symbol"], [_fraction(e) for e in spec["epsilon_grid"]], spec.get("a")
    )
    return W.checks


def _sample_spec(spec) -> SampleSpec:
    return SampleSpec(int(spec.get("length", 10**6)), int(spec.get("seed", 0)), int(spec.get("burn_in", 0)))


def _simulate_symbols(ctx, spec):
    X, ss = ctx.chain(spec), _sample_spec(spec)
    pi = stationary_vector(X)
    exact: dict = {}
    for i, lab in enumerate(X.labels):
        exact[lab] = exact.get(lab, 0) + pi[i]
    # consecutive symbols are dependent: gate on TV unless asked otherwise
    return [
        empirical_compare(
            exact, sample_path(X, ss), name="symbol_frequencies", tv_threshold=ctx.tv,
            chi2_alpha=spec.get("chi2_alpha"), seed=ss.seed,
        )
    ]


def _simulate_return_time(ctx, spec):
    X, ss, s = ctx.chain(spec), _sample_spec(spec), spec["symbol"]
    N = int(spec.get("horizon", 200))
    T = return_time_distribution(X, s, N)
    exact = {n: p for n, p in enumerate(T.pmf_upto(N), start=1)}
    return [
        empirical_compare(
            exact, sample_path(X, ss), lambda xs: return_times(xs, s), name=f"return_time[{s}]",
            tv_threshold=ctx.tv, chi2_alpha=ctx.chi2_alpha, seed=ss.seed,
        )
    ]


def _simulate_prop2(ctx, spec):
    Xpp, W = prop2_pipeline(ctx.chain(spec), spec["symbol"], [_fraction(e) for e in spec["epsilon_grid"]], spec.get("a"))
    return simulate_marker(Xpp, W.artifacts["M"].k0, _sample_spec(spec), ctx.tv)


def simulate_marker(Xpp: LabeledMarkovChain, k0: int, ss: SampleSpec, tv: float = DEFAULT_TV):
    """Monte Carlo marker rate and lagged recurrence of symbol 1 against exact values."""
    pi = stationary_vector(Xpp)
    p1 = sum((pi[i] for i in Xpp.with_label(1)), Fraction(0))
    path = sample_path(Xpp, ss)
    reports = [
        empirical_compare(
            {True: p1, False: 1 - p1}, path, lambda xs: (x == 1 for x in xs), name="marker_rate",
            tv_threshold=tv, chi2_alpha=None, seed=ss.seed,
        )
    ]
    for lag in (k0 + 1, k0 + 5, k0 + 20):
        est, trials = conditional_rate(path, 1, lag)
        reports.append(binomial_check(f"marker_recurrence[n={lag}]", est, trials, float(p1), seed=ss.seed))
    return reports


CHECKS: dict[str, Callable[[Context, dict], list[VerificationReport]]] = {
    "renewal_state": _renewal_state,
    "exponential_tail": _exponential_tail,
    "compound_law": _compound_law,
    "regular_tail": _regular_tail,
    "marker": _marker,
    "prop1": _prop1,
    "prop2": _prop2,
    "simulate_symbols": _simulate_symbols,
    "simulate_return_time": _simulate_return_time,
    "simulate_prop2": _simulate_prop2,
}
SYMBOL_KEYS = ("symbol", "s1", "s2", "a")
STOCHASTIC = {name for name in CHECKS if name.startswith("simulate")}


def _validate(cfg: dict, chains: dict) -> list[dict]:
    checks = cfg.get("checks", [])
    if not isinstance(checks, list):
        raise ConfigError("'checks' must be a list")
    problems = []
    unknown = sorted({c.get("check", "<missing>") for c in checks if c.get("check") not in CHECKS})
    if unknown:
        problems.append(f"unknown check names: {', '.join(unknown)} (known: {', '.join(sorted(CHECKS))})")
    for n, c in enumerate(checks):
        if c.get("check") not in CHECKS:
            continue
        name = c.get("chain")
        if name not in chains:
            problems.append(f"check #{n} ({c['check']}): unknown chain {name!r}")
            continue
        alphabet = chains[name].alphabet
        for key in SYMBOL_KEYS:
            if key in c and c[key] not in alphabet:
                if key == "a" and c["check"] in ("prop2", "simulate_prop2"):
                    continue  # refers to the split process, checked by the pipeline
                problems.append(f"check #{n} ({c['check']}): symbol {c[key]!r} not in chain {name!r}")
    if problems:
        raise ConfigError("; ".join(problems))
    return checks


def run_config(
    path: str | Path,
    report_path: str | Path | None = None,
    only: set[str] | None = None,
    echo: Callable[[str], Any] | None = print,
) -> tuple[int, list[VerificationReport]]:
    """Run every check declared in the config at ``path``.

    Returns the exit code (0 iff every report is PASS, 2 for config errors)
    and the reports. ``only`` restricts the run to the named check kinds.
    """
    try:
        cfg = load_config(path)
        chains = {name: build_chain(name, spec) for name, spec in cfg.get("chains", {}).items()}
        checks = _validate(cfg, chains)
    except (ConfigError, OSError) as exc:
        if echo:
            echo(f"config error: {exc}")
        return EXIT_CONFIG, []
    ctx = Context(chains, cfg.get("thresholds", {}))
    reports: list[VerificationReport] = []
    for c in checks:
        if only is not None and c["check"] not in only:
            continue
        try:
            got = CHECKS[c["check"]](ctx, c)
        except (ChainError, ValueError, TypeError, KeyError) as exc:
            got = [
                VerificationReport(
                    c["check"], Status.FAIL, witness={"error": type(exc).__name__, "message": str(exc),
                                                      **getattr(exc, "diagnostics", {})}
                )
            ]
        for r in got:
            if echo:
                echo(r.line())
        reports.extend(got)
    out = report_path or cfg.get("report")
    if out:
        dump_reports(reports, out)
    return (EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL), reports

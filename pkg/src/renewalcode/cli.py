"""Command-line entry point: ``renewalcode <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from .chain import as_probability
from .harness.config import CHECKS, EXIT_CONFIG, EXIT_FAIL, EXIT_OK, STOCHASTIC, run_config
from .renewal import GEOMETRIC, NONE, RESIDUAL, ReturnTimeDistribution, hazard_from_pmf
from .report import to_jsonable
from .tails import (
    NotSemiRegular,
    TailCertificationError,
    exponential_tail_check,
    geometric_compound,
    regular_tail_certify,
    semi_regular_params,
    support_gcd,
)


def read_pmf(path: str) -> ReturnTimeDistribution:
    """Read a pmf file.

    Either JSON ``{"pmf": [...], "tail": "none"|"geometric"|"residual",
    "tail_hazard": "p"}`` or plain text with one probability per line
    (``#`` comments allowed). Entries are exact (``"num/den"`` or decimal
    strings). Plain text whose mass falls short of one gets a residual tail.
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        spec = json.loads(text)
        values = [as_probability(str(v)) for v in spec["pmf"]]
        tail = spec.get("tail", NONE)
        hazard = spec.get("tail_hazard")
        hazard = None if hazard is None else as_probability(str(hazard))
    else:
        values = [as_probability(tok) for line in text.splitlines() for tok in line.split("#")[0].split()]
        tail, hazard = NONE, None
    if tail == NONE and sum(values) < 1:
        tail = RESIDUAL
    if tail == NONE:
        return ReturnTimeDistribution(tuple(values))
    return ReturnTimeDistribution(tuple(values), tail, 1 - sum(values), hazard)


def _cmd_analyze_tail(args) -> int:
    T = read_pmf(args.pmf_file)
    out = {"K": T.K, "tail": T.tail, "support_gcd": support_gcd(T)}
    if T.tail != RESIDUAL:
        out["mean"] = T.mean()
    res = exponential_tail_check(T)
    out["exponential_tail"] = {"status": res.status.value, "C": res.C, "c": res.c, **res.witness}
    if T.tail == GEOMETRIC:
        f = hazard_from_pmf(T)
        out["hazard"] = {"values": list(f.values), "tail": f.tail}
        try:
            p = semi_regular_params(f)
            out["semi_regular"] = {"c": p.c, "k0": p.k0}
        except NotSemiRegular as exc:
            out["semi_regular"] = {"error": str(exc)}
    print(json.dumps(to_jsonable(out), indent=2))
    return EXIT_OK if res.status.value == "PASS" else EXIT_FAIL


def _cmd_compound(args) -> int:
    T = read_pmf(args.pmf_file)
    mu = as_probability(args.mu)
    q = geometric_compound(T, mu, args.horizon)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "probability", "exact"])
            for n, p in enumerate(q, start=1):
                w.writerow([n, float(p), f"{p.numerator}/{p.denominator}" if isinstance(p, Fraction) else p])
    out = {"mu": mu, "horizon": args.horizon}
    code = EXIT_OK
    try:
        fit = regular_tail_certify(q, window=tuple(args.window) if args.window else None)
        out["fit"] = {
            "C": fit.C,
            "c": fit.c,
            "b": fit.b,
            "residual_bound": fit.residual_bound,
            "window": fit.window,
            "ratio_spread": fit.ratio_spread,
            "exactly_geometric": fit.exactly_geometric,
        }
    except TailCertificationError as exc:
        out["fit"] = {"error": str(exc), **exc.diagnostics}
        code = EXIT_FAIL
    print(json.dumps(to_jsonable(out), indent=2))
    return code


def _runner(only):
    def run(args) -> int:
        code, _ = run_config(args.config, args.report, only)
        return code

    return run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="renewalcode", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze-tail", help="tail, hazard and semi-regular parameters of a pmf")
    a.add_argument("pmf_file")
    a.set_defaults(func=_cmd_analyze_tail)

    c = sub.add_parser("compound", help="geometric compound of a pmf and its tail fit")
    c.add_argument("pmf_file")
    c.add_argument("--mu", required=True, help="coin rate, e.g. 1/10")
    c.add_argument("--horizon", type=int, default=400)
    c.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"))
    c.add_argument("--csv", help="write (n, P(T*=n)) rows here")
    c.set_defaults(func=_cmd_compound)

    kinds = {
        "prop1": ({"prop1"}, "run the prop1 entries of a config"),
        "prop2": ({"prop2"}, "run the prop2 entries of a config"),
        "verify": (None, "run every check in a config"),
        "simulate": (STOCHASTIC, "run the Monte Carlo entries of a config"),
    }
    for name, (only, text) in kinds.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("config")
        s.add_argument("--report", help="JSON report path (overrides the config's 'report')")
        s.set_defaults(func=_runner(only))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

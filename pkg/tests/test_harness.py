import json
import math
from fractions import Fraction

import pytest
from conftest import ROOT

from renewalcode.chain import LabeledMarkovChain
from renewalcode.cli import main, read_pmf
from renewalcode.constructions.demos import constant_hazard_chain
from renewalcode.harness import (
    SampleSpec,
    binomial_check,
    conditional_rate,
    empirical_compare,
    return_times,
    run_config,
    sample_path,
)
from renewalcode.harness.sampling import CHUNK, uniform_chunk
from renewalcode.renewal import return_time_distribution
from renewalcode.report import Status

COIN = LabeledMarkovChain.from_matrix([["1/2", "1/2"], ["1/2", "1/2"]])


def test_sample_spec_validation():
    with pytest.raises(ValueError):
        SampleSpec(0, 1)
    with pytest.raises(ValueError):
        SampleSpec(10, 1, burn_in=-1)
    with pytest.raises(ValueError):
        SampleSpec(10, -1)


def test_sampling_is_reproducible():
    a = sample_path(constant_hazard_chain(), SampleSpec(5000, 42))
    b = sample_path(constant_hazard_chain(), SampleSpec(5000, 42))
    c = sample_path(constant_hazard_chain(), SampleSpec(5000, 43))
    assert a == b and a != c


def test_chunks_are_independent_of_each_other():
    # chunk 3 does not depend on chunks 0..2 having been drawn
    assert (uniform_chunk(9, 3) == uniform_chunk(9, 3)).all()
    long = sample_path(COIN, SampleSpec(CHUNK + 100, 5))
    assert long[:50] == sample_path(COIN, SampleSpec(50, 5))


def test_burn_in_shifts_the_path():
    full = sample_path(COIN, SampleSpec(200, 3))
    assert sample_path(COIN, SampleSpec(150, 3, burn_in=50)) == full[50:]


@pytest.mark.slow
def test_coin_frequencies_concentrate():
    n = 10**6
    path = sample_path(COIN, SampleSpec(n, 2024))
    freq = path.count(0) / n
    assert abs(freq - 0.5) <= 4 * math.sqrt(0.25 / n)


@pytest.mark.slow
def test_return_time_law_matches_exact():
    Y = constant_hazard_chain()
    path = sample_path(Y, SampleSpec(10**6, 99))
    T = return_time_distribution(Y, "s", 100)
    exact = dict(enumerate(T.pmf_upto(100), start=1))
    rep = empirical_compare(exact, path, lambda xs: return_times(xs, "s"), seed=99)
    assert rep.passed and rep.witness["tv"] <= 0.01


def test_identical_laws_have_zero_tv():
    sample = ["a", "a", "b", "b"]
    rep = empirical_compare({"a": Fraction(1, 2), "b": Fraction(1, 2)}, sample)
    assert rep.lhs == 0 and rep.passed


def test_perturbed_oracle_fails():
    path = sample_path(COIN, SampleSpec(100000, 1))
    rep = empirical_compare({0: Fraction(11, 20), 1: Fraction(9, 20)}, path, seed=1)
    assert rep.status is Status.FAIL
    assert rep.seed == 1


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        empirical_compare({0: 1}, [])


def test_impossible_event_fails():
    rep = empirical_compare({0: Fraction(1), 1: Fraction(0)}, [0] * 999 + [1], tv_threshold=0.01)
    assert rep.status is Status.FAIL and rep.witness["impossible_events"] == [1]


def test_binomial_check_and_conditional_rate():
    seq = [1, 0, 1, 0, 1, 0, 1, 0]
    assert conditional_rate(seq, 1, 2) == (1.0, 3)
    assert binomial_check("x", 0.5, 10000, 0.5).passed
    assert not binomial_check("x", 0.6, 10000, 0.5).passed


# config runner ------------------------------------------------------------------


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=2))
    return p


def test_empty_check_list(tmp_path):
    out = tmp_path / "rep.json"
    code, reports = run_config(_write(tmp_path, {"checks": []}), out, echo=None)
    assert code == 0 and reports == []
    assert json.loads(out.read_text()) == []


def test_parse_error_reports_line(tmp_path, capsys):
    code, _ = run_config(_write(tmp_path, '{\n  "checks": [\n    oops\n  ]\n}'))
    assert code == 2
    assert "cfg.json:3:" in capsys.readouterr().out


def test_unknown_checks_listed(tmp_path, capsys):
    cfg = {"chains": {}, "checks": [{"check": "frobnicate"}, {"check": "wibble"}]}
    code, _ = run_config(_write(tmp_path, cfg))
    out = capsys.readouterr().out
    assert code == 2 and "frobnicate" in out and "wibble" in out


def test_missing_symbol_diagnosed(tmp_path, capsys):
    cfg = {
        "chains": {"c": {"demo": "constant_hazard"}},
        "checks": [{"check": "renewal_state", "chain": "c", "symbol": "zzz"}],
    }
    code, _ = run_config(_write(tmp_path, cfg))
    assert code != 0 and "'zzz' not in chain 'c'" in capsys.readouterr().out


def test_bad_chain_rows_diagnosed(tmp_path, capsys):
    cfg = {"chains": {"c": {"transitions": {"a": {"a": "1/2"}}}}, "checks": []}
    code, _ = run_config(_write(tmp_path, cfg))
    assert code == 2 and "sums to" in capsys.readouterr().out


def test_failing_check_gives_exit_one(tmp_path):
    cfg = {
        "chains": {
            "x": {
                "transitions": {"x": {"a1": "1/2", "x": "1/2"}, "a1": {"y": "1"}, "y": {"a2": "1/2", "y": "1/2"}, "a2": {"x": "1"}},
                "labels": {"x": "x", "a1": "a", "y": "y", "a2": "a"},
            }
        },
        "checks": [{"check": "renewal_state", "chain": "x", "symbol": "a", "depth": 1}],
    }
    code, reports = run_config(_write(tmp_path, cfg), echo=None)
    assert code == 1 and reports[0].status is Status.FAIL


def test_shipped_prop2_config_passes(tmp_path):
    out = tmp_path / "prop2.json"
    code, reports = run_config(ROOT / "configs" / "prop2_demo.json", out, echo=None)
    assert code == 0 and reports
    data = json.loads(out.read_text())
    assert all(r["status"] == "PASS" for r in data)
    assert all("seed" not in r for r in data)  # exact checks carry no seed


def test_shipped_prop1_config_passes():
    code, _ = run_config(ROOT / "configs" / "prop1_demo.json", echo=None)
    assert code == 0


# CLI ----------------------------------------------------------------------------


def test_cli_analyze_tail(capsys):
    assert main(["analyze-tail", str(ROOT / "configs" / "geometric_half.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["semi_regular"] == {"c": "1/2", "k0": 1}


def test_cli_compound_writes_csv(tmp_path, capsys):
    csv_path = tmp_path / "q.csv"
    code = main(["compound", "--mu", "1/10", str(ROOT / "configs" / "uniform3.txt"), "--csv", str(csv_path)])
    assert code == 0
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "n,probability,exact" and len(rows) == 401
    assert json.loads(capsys.readouterr().out)["fit"]["b"] > 0


def test_cli_prop_subcommands_filter(tmp_path):
    rep = tmp_path / "r.json"
    assert main(["prop1", str(ROOT / "configs" / "prop1_demo.json"), "--report", str(rep)]) == 0
    names = {r["check"] for r in json.loads(rep.read_text())}
    assert "compound_law" not in names and "symbol_1_is_compound" in names


def test_read_pmf_text_residual(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("# two values\n1/2\n1/4\n")
    T = read_pmf(str(p))
    assert T.tail == "residual" and T.tail_mass == Fraction(1, 4)


def test_cli_missing_file():
    assert main(["analyze-tail", "/nonexistent/pmf.txt"]) == 2

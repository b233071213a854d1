import copy
import json
import subprocess
import sys
from argparse import Namespace
from pathlib import Path

import pytest

from prevision.cli import main, run
from prevision.marketfile import load
from prevision.report import verify_report

MARKETS = Path(__file__).resolve().parent.parent / "markets"


def opts(**kw):
    base = dict(relevant_only=False, full_support=False, reference=None, summary=False, grid=None, timing=False)
    base.update(kw)
    return Namespace(**base)


def invoke(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def write(tmp_path, doc, name="m.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def test_check_valid_probability(capsys):
    code, rep, _ = invoke(capsys, "check", MARKETS / "valid_probability.json")
    assert code == 0
    assert rep["verdict"]["coherent"] is True
    assert rep["certificates"][0]["kind"] == "pricing_measure"
    assert rep["certificates"][0]["weights"] == ["3/10", "7/10"]


def test_check_nine_tenths(capsys):
    code, rep, _ = invoke(capsys, "check", MARKETS / "omega_nine_tenths.json", "--summary")
    assert code == 1
    book = rep["certificates"][0]
    assert book["kind"] == "book" and book["epsilon"] == "1/10"
    assert rep["summary"]


def test_bounds_call(capsys):
    code, rep, _ = invoke(capsys, "bounds", MARKETS / "three_scenario_call.json")
    assert code == 0
    iv = rep["certificates"][0]
    assert (iv["lower"], iv["upper"]) == ("0", "1/2")
    # two hedges and two measures
    assert iv["upper_hedge"] == [["S", "1/2"]]
    assert iv["lower_measure"] == ["0", "1", "0"] and iv["upper_measure"] == ["1/2", "0", "1/2"]
    assert rep["verdict"]["extension_coherent"] is True


def test_bounds_outside_price(tmp_path, capsys):
    doc = json.loads((MARKETS / "three_scenario_call.json").read_text())
    doc["price"] = "3/4"
    code, rep, _ = invoke(capsys, "bounds", write(tmp_path, doc))
    assert code == 1
    assert rep["verdict"]["extension_coherent"] is False
    assert rep["certificates"][-1]["context"] == "extended"


def test_classify_default_and_file_reference(capsys):
    code, rep, _ = invoke(capsys, "classify", MARKETS / "binomial.json")
    assert code == 0 and rep["verdict"]["arbitrage_free"]
    assert any("uniform" in n for n in rep["notes"])
    code, rep, _ = invoke(capsys, "classify", MARKETS / "binomial_overpriced.json")
    assert code == 1
    assert rep["verdict"]["reference"] == ["1/4", "3/4"]
    assert {c["kind"] for c in rep["certificates"]} == {"book", "strong_arbitrage", "p_arbitrage"}


def test_reference_flag(tmp_path, capsys):
    ref = write(tmp_path, '{"weights": ["1/10", "9/10"]}', "ref.json")
    code, rep, _ = invoke(capsys, "classify", MARKETS / "binomial_overpriced.json", "--reference", ref)
    assert rep["verdict"]["reference"] == ["1/10", "9/10"]
    bad = write(tmp_path, '["1/2"]', "bad.json")
    code, _, err = invoke(capsys, "classify", MARKETS / "binomial.json", "--reference", bad)
    assert code == 2 and "reference" in err


def test_measure_full_support(capsys):
    code, rep, _ = invoke(capsys, "measure", MARKETS / "binomial.json", "--full-support")
    assert code == 0
    assert rep["certificates"][0]["weights"] == ["1/2", "1/2"]
    assert rep["certificates"][0]["min_weight"] == "1/2"


def test_measure_full_support_missing(tmp_path, capsys):
    doc = {"mode": "gambles", "scenarios": ["a", "b", "c"], "gambles": [{"name": "S", "payoffs": [0, 0, 1], "prevision": 0}]}
    code, rep, _ = invoke(capsys, "measure", write(tmp_path, doc), "--full-support")
    assert code == 1
    assert rep["certificates"][0]["kind"] == "p_arbitrage"


def test_relevant_only(tmp_path, capsys):
    doc = {
        "mode": "events",
        "scenarios": ["a", "b"],
        "events": [
            {"members": [], "quote": 0},
            {"members": ["a"], "quote": 1},
            {"members": ["b"], "quote": "-1/5"},
            {"members": ["a", "b"], "quote": 1},
        ],
    }
    path = write(tmp_path, doc)
    assert invoke(capsys, "book", path)[0] == 1
    assert invoke(capsys, "book", path, "--relevant-only")[0] == 0
    code, rep, _ = invoke(capsys, "check", path, "--relevant-only")
    assert code == 0 and rep["verdict"]["axiom_violations"]


def test_diagnose_example_with_grid(capsys):
    code, rep, _ = invoke(capsys, "diagnose", MARKETS / "identity_on_unit_interval.json", "--grid", 7)
    assert code == 1
    v = rep["verdict"]
    assert v["coherent"] and v["strong_arbitrage"] and v["countably_additive_measure_exists"] is False
    assert v["concentration_point"] == "0"
    assert rep["grid"] == {"n": 7, "coherent": False, "strong_arbitrage_grid_minimum": "1/7", "book_epsilon": "1/7"}
    strong = rep["certificates"][0]
    assert strong["infimum"] == {"value": "0", "attained": False, "location": "0"}


def test_interval_classify_and_measure(tmp_path, capsys):
    code, rep, _ = invoke(capsys, "classify", MARKETS / "identity_on_unit_interval.json")
    assert code == 1 and rep["verdict"]["strong"] and not rep["verdict"]["uniformly_strong"]
    doc = json.loads((MARKETS / "identity_on_unit_interval.json").read_text())
    doc["gambles"][0]["prevision"] = "1/3"
    code, rep, _ = invoke(capsys, "measure", write(tmp_path, doc))
    assert code == 0
    assert rep["certificates"][0]["atoms"] == [["1/3", "1"]]


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ('{"mode": "gambles",\n "scenarios": [1,}', "line 2"),
        ('{"mode": "bogus"}', "mode"),
        ('{"mode": "gambles", "scenarios": ["a"], "gambles": [{"name": "S", "payoffs": ["x"], "prevision": 1}]}', "gambles[0].payoffs[0]"),
        ('{"mode": "gambles", "scenarios": ["a", "b"], "gambles": [{"name": "S", "payoffs": [1], "prevision": 1}]}', "gambles[0].payoffs"),
        ('{"mode": "events", "scenarios": ["a", "b"], "events": [{"members": ["a"], "quote": "1/2"}]}', "missing quotes"),
        ('{"mode": "events", "scenarios": ["a"], "events": [{"members": ["z"], "quote": 1}]}', "events[0].members"),
        ('{"mode": "interval", "gambles": [{"name": "f", "pieces": [["0", "1/2", 1, 0]], "prevision": 0}]}', "gambles[0]"),
        ('{"mode": "gambles", "scenarios": ["a"], "gambles": [], "price": 1}', "price"),
    ],
)
def test_input_errors_exit_2(tmp_path, capsys, doc, fragment):
    code, rep, err = invoke(capsys, "check", write(tmp_path, doc))
    assert code == 2 and rep is None
    assert fragment in err


def test_command_mode_mismatch(capsys):
    assert invoke(capsys, "diagnose", MARKETS / "binomial.json")[0] == 2
    assert invoke(capsys, "bounds", MARKETS / "binomial.json")[0] == 2
    assert invoke(capsys, "check", MARKETS / "binomial.json", "--grid", 3)[0] == 2


def test_missing_file(capsys):
    code, _, err = invoke(capsys, "check", "/nonexistent/file.json")
    assert code == 2 and "cannot read" in err


def test_byte_identical_reports(capsys):
    for name in ("valid_probability", "three_scenario_call", "identity_on_unit_interval"):
        path = MARKETS / f"{name}.json"
        main(["check", str(path), "--summary"])
        first = capsys.readouterr().out
        main(["check", str(path), "--summary"])
        assert capsys.readouterr().out == first


def test_round_trip_and_tampering():
    path = MARKETS / "omega_nine_tenths.json"
    _, rep = run("check", path, opts())
    rep = json.loads(json.dumps(rep))
    mf = load(path)
    assert all(ok for _, _, ok in verify_report(rep, mf))
    bad = copy.deepcopy(rep)
    bad["certificates"][0]["epsilon"] = "1/5"
    assert not verify_report(bad, mf)[0][2]
    bad = copy.deepcopy(rep)
    bad["certificates"][0]["legs"][0]["price"] = "1"
    assert not verify_report(bad, mf)[0][2]
    bad = copy.deepcopy(rep)
    bad["certificates"][0]["payoff"] = [0.1, 0.1]
    assert not verify_report(bad, mf)[0][2]


@pytest.mark.parametrize("command", ["check", "book", "measure", "classify", "bounds"])
def test_round_trip_every_finite_command(command):
    path = MARKETS / "three_scenario_call.json"
    _, rep = run(command, path, opts(full_support=command == "measure"))
    assert all(ok for _, _, ok in verify_report(json.loads(json.dumps(rep)), load(path)))


def test_no_floats_in_reports():
    for path in MARKETS.glob("*.json"):
        for command in ("check", "classify", "measure"):
            try:
                _, rep = run(command, path, opts())
            except Exception:
                continue
            text = json.dumps(rep)
            json.loads(text, parse_float=lambda s: pytest.fail(f"float {s} in {command} report"))


def test_console_script():
    out = subprocess.run(
        [sys.executable, "-m", "prevision.cli", "check", str(MARKETS / "binomial.json")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["verdict"]["coherent"] is True

import csv
import io
import json

import pytest

from rencontre.cli import dispatch, to_csv, to_json
from rencontre.bounds import TABLE1


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_tail_prob(capsys):
    code, out, _ = run(capsys, "tail-prob", "--d", "2", "--p", "0.3,0.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["p_infinity"] == 0.2 and doc["method"] == "closed-form-d2"


def test_dist_exact(capsys):
    code, out, _ = run(capsys, "dist", "--d", "2", "--p", "1/2,1/2", "--n-max", "2", "--exact")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "r_n", "f_n", "cumulative", "defect"]
    assert rows[1][:3] == ["1", "1/2", "1/2"]
    assert rows[2][:3] == ["2", "3/8", "1/8"]


def test_dist_exact_needs_ratios(capsys):
    code, _, err = run(capsys, "dist", "--p", "0.5,0.5", "--n-max", "2", "--exact")
    assert code == 2 and "--exact" in err


def test_dist_json(capsys):
    code, out, _ = run(capsys, "dist", "--p", "0.5,0.5", "--n-max", "3", "--format", "json")
    doc = json.loads(out)
    assert [r["n"] for r in doc["rows"]] == [1, 2, 3]
    assert doc["rows"][1]["f_n"] == pytest.approx(0.125)


def test_table1(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == len(TABLE1) == 9
    for r in rows:
        assert r["abs_diff"] != ""
        assert set(r) >= {"row", "params", "lambda1", "lambda2", "lower", "upper",
                          "paper_lower", "paper_upper", "abs_diff"}
    assert rows[0]["lower"] == "3.86223"
    assert "d=5" in rows[7]["params"]


def test_table1_does_not_touch_fixtures(capsys):
    before = [(r.p, r.paper_lower, r.paper_upper) for r in TABLE1]
    run(capsys, "table1", "--five-as-d4", "--row4-alt")
    assert [(r.p, r.paper_lower, r.paper_upper) for r in TABLE1] == before


def test_cond_exp_bounds(capsys):
    code, out, _ = run(capsys, "cond-exp-bounds", "--p", "0.3,0.4,0.5", "--lambda1", "1/80", "--lambda2", "1/8")
    doc = json.loads(out)
    assert code == 0
    assert {"lower_E", "upper_E", "constants_used"} <= set(doc)
    assert doc["lower_E"] == pytest.approx(3.86223, rel=1e-5)


def test_infinite_classification_has_no_numbers(capsys):
    code, out, _ = run(capsys, "cond-exp-bounds", "--p", "0.5,0.5,0.5", "--lambda1", "0.1", "--lambda2", "0.1")
    doc = json.loads(out)
    assert code == 0 and doc["classification"] == "infinite"
    assert "lower_E" not in doc and "upper_E" not in doc


def test_divergent_number_exits_3(capsys):
    code, out, err = run(capsys, "gf", "--p", "0.5,0.5,0.5", "--x", "1")
    assert code == 3 and out == "" and "diverg" in err


def test_gf(capsys):
    code, out, _ = run(capsys, "gf", "--p", "0.3,0.5", "--x", "0.5", "--order", "1")
    doc = json.loads(out)
    assert code == 0 and doc["value"] > 0 and doc["truncation_error"] >= 0


@pytest.mark.parametrize("argv,flag", [
    (["tail-prob", "--p", "0.3,abc"], "--p"),
    (["tail-prob", "--p", "0.3,,0.5"], "--p"),
    (["tail-prob", "--p", "0.3,0.5", "--bogus"], "--bogus"),
    (["gf", "--p", "0.3,0.5", "--x", "1.5"], "--x"),
    (["cond-exp-bounds", "--p", "0.3,0.4,0.5", "--lambda1", "2", "--lambda2", "0.1"], "--lambda1"),
])
def test_validation_exit_2(capsys, argv, flag):
    code, _, err = run(capsys, *argv)
    assert code == 2 and flag in err


def test_domain_errors_exit_2(capsys):
    assert run(capsys, "tail-prob", "--d", "3", "--p", "0.3,0.5")[0] == 2
    assert run(capsys, "tail-prob", "--p", "0.0,0.5")[0] == 2
    assert run(capsys, "cond-exp-bounds", "--p", "0.3,0.5", "--lambda1", "0.1", "--lambda2", "0.1")[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"p": [0.2, 0.6]}))
    code, out, _ = run(capsys, "tail-prob", "--config", str(cfg))
    assert code == 0 and json.loads(out)["p_infinity"] == pytest.approx(0.4)
    code, _, err = run(capsys, "tail-prob", "--config", str(cfg), "--p", "0.1,0.2")
    assert code == 2 and "--config" in err


def test_simulate(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--p", "0.5,0.5", "--seed", "3", "--horizon", "10", "--reps", "1000")
    doc = json.loads(out)
    assert code == 0 and sum(doc["histogram"]) + doc["censored"] == 1000
    out_path = tmp_path / "h.csv"
    code, _, _ = run(capsys, "simulate", "--p", "0.5,0.5", "--seed", "3", "--horizon", "10", "--reps", "1000",
                     "--format", "csv", "--output", str(out_path))
    rows = list(csv.reader(out_path.open()))
    assert code == 0 and rows[0] == ["n", "count"]


def test_output_directory_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RENCONTRE_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "tail-prob", "--p", "0.3,0.5")
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "tail-prob.json").read_text())["p_infinity"] == 0.2


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "tail-prob", "--p", "0.3,0.5", "--output", str(tmp_path / "no" / "x.json"))
    assert code == 2 and "--output" in err


def test_empty_csv_has_header():
    assert to_csv(["n", "count"], []) == "n,count\r\n"


def test_json_round_trip():
    doc = {"schema_version": "1", "a": 0.1, "b": [1, 2.5, 1e-300, 3.0], "c": {"x": None, "y": "s,\"q\""}}
    text = to_json(doc)
    assert to_json(json.loads(text)) == text
    assert "0.10000000000000001" in text


def test_cli_documents_round_trip(capsys):
    for argv in (["tail-prob", "--p", "0.3,0.4,0.5"],
                 ["cond-exp-bounds", "--p", "0.3,0.4,0.5", "--lambda1", "1/80", "--lambda2", "1/8"],
                 ["table1", "--format", "json"]):
        _, out, _ = run(capsys, *argv)
        assert to_json(json.loads(out)) == out

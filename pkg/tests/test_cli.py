"""Command-line runner: records, formats, determinism, and exit codes."""

import json
from pathlib import Path

import jsonschema
import pytest

from exocomp import acceptance, cli

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "result_record.schema.json").read_text()
)


def test_param_coercion():
    params = cli.parse_params(["a=true", "b=False", "c=12", "d=2.5", "e=hello", "f=1,2"])
    assert params == {"a": True, "b": False, "c": 12, "d": 2.5, "e": "hello", "f": "1,2"}
    with pytest.raises(cli.UsageError):
        cli.parse_params(["oops"])


def test_config_file_with_comments(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ninstances = 3\n\nnum_vars=4  # trailing\n")
    assert cli.read_config(str(cfg)) == {"instances": 3, "num_vars": 4}


def test_run_experiment_record_matches_schema():
    record = cli.run_experiment("bounds", {}, seed=7)
    jsonschema.validate(record, SCHEMA)
    assert record["wall_time_s"] is None
    assert record["params"]["dilation_ratio"] == 1024.0
    parsed = json.loads(cli.record_json(record))
    assert parsed == record


def test_run_experiment_rejects_unknowns():
    with pytest.raises(cli.UsageError):
        cli.run_experiment("warp-drive", {}, seed=1)
    with pytest.raises(cli.UsageError):
        cli.run_experiment("bounds", {"speed": 3}, seed=1)


def test_records_are_byte_deterministic():
    a = cli.record_json(cli.run_experiment("qbf-nonlinear", {"instances": 4, "num_vars": 3}, 11))
    b = cli.record_json(cli.run_experiment("qbf-nonlinear", {"instances": 4, "num_vars": 3}, 11))
    c = cli.record_json(cli.run_experiment("qbf-nonlinear", {"instances": 4, "num_vars": 3}, 12))
    assert a == b
    assert a != c
    assert a.endswith("\n")


def test_csv_output_shape():
    record = cli.run_experiment("qbf-nonlinear", {"instances": 3, "num_vars": 3}, 5)
    text = cli.record_csv(record)
    lines = text.strip().splitlines()
    assert lines[0] == "index,nonlinear,brute_force"
    assert len(lines) == 4
    empty = dict(record, rows=[])
    assert cli.record_csv(empty) == ""


def test_main_writes_json_record(tmp_path, capsys):
    out = tmp_path / "record.json"
    code = cli.main(["bounds", "--seed", "3", "--out", str(out)])
    assert code == 0
    record = json.loads(out.read_text())
    jsonschema.validate(record, SCHEMA)
    assert record["seed"] == 3
    err = capsys.readouterr().err
    assert "bounds:" in err  # timing goes to stderr, not into the record


def test_main_config_then_params_precedence(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("instances=2\nnum_vars=3\n")
    out = tmp_path / "r.json"
    code = cli.main(
        ["qbf-nonlinear", "--config", str(cfg), "--params", "instances=5", "--out", str(out)]
    )
    assert code == 0
    record = json.loads(out.read_text())
    assert record["params"]["instances"] == 5  # --params wins
    assert record["params"]["num_vars"] == 3
    assert len(record["rows"]) == 5


def test_main_usage_errors_exit_two(capsys):
    assert cli.main(["bounds", "--params", "nope=1"]) == 2
    assert "error:" in capsys.readouterr().err
    assert cli.main(["bounds", "--config", "/nonexistent/path.cfg"]) == 2
    assert cli.main(["ctc-pspace", "--params", "num_vars=4"]) == 2


def test_main_steiner_exact_reads_instance_file(tmp_path):
    inst = tmp_path / "points.txt"
    inst.write_text("3\n0.0 0.0\n1.0 0.0\n0.5 0.8\n")
    out = tmp_path / "tree.json"
    code = cli.main(["steiner-exact", "--params", f"file={inst}", "--out", str(out)])
    assert code == 0
    record = json.loads(out.read_text())
    assert record["metrics"]["violations"] == 0
    assert record["metrics"]["total_length"] <= record["metrics"]["mst_length"] + 1e-9
    assert sum(1 for row in record["rows"] if row["kind"] == "terminal") == 3


def _stub_results(all_pass):
    results = []
    for cid in range(1, 17):
        results.append(
            acceptance.CriterionResult(
                cid=cid,
                name=f"stub criterion {cid}",
                passed=all_pass or cid != 9,
                expected="stubbed",
                measured={"value": cid},
                runtime_budget_s=60.0 if cid < 16 else None,
                runtime_s=0.01,
            )
        )
    payload = {
        "version": "0.1.0",
        "seed": 2026,
        "all_passed": all(r.passed for r in results),
        "criteria": [
            {
                "id": r.cid,
                "name": r.name,
                "passed": r.passed,
                "expected": r.expected,
                "measured": r.measured,
                "runtime_budget_s": r.runtime_budget_s,
            }
            for r in results
        ],
    }
    return payload, results


def test_accept_exit_codes_and_criterion_lines(monkeypatch, tmp_path, capsys):
    monkeypatch.setattr(acceptance, "run_all", lambda seed: _stub_results(True))
    out = tmp_path / "report.json"
    assert cli.main(["accept", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert err.count("PASS") == 16
    report = json.loads(out.read_text())
    assert report["all_passed"] is True

    monkeypatch.setattr(acceptance, "run_all", lambda seed: _stub_results(False))
    assert cli.main(["accept", "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "criterion  9 FAIL" in err
    assert err.count("PASS") == 15

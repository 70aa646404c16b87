import io
import json
from pathlib import Path

import pandas as pd
import pytest

from config import scenarios_dir
from db.results_db import ResultsDB
from harness.main import EXIT_OK, EXIT_USAGE, build_arg_parser, cli_main
from harness.reporting import read_comparison_csv, read_nomographic_csv, read_trace_csv

CONSTANT_FTC = str(Path(scenarios_dir) / "four-agents-constant-ftc.json")


def test_validate_prints_ok(capsys):
    assert cli_main(["validate", CONSTANT_FTC]) == EXIT_OK
    assert capsys.readouterr().out == "ok\n"


def test_validate_reports_schema_errors(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"topology": {"n": 2, "arcs": [[0, 1], [1, 0]]}, "x0": [1, 2],
                                "protocol": "flooding"}), encoding="utf-8")
    assert cli_main(["validate", str(path)]) == EXIT_USAGE
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "protocol" in captured.err


def test_run_prints_summary_json(capsys):
    assert cli_main(["run", CONSTANT_FTC]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["scenario"] == "four-agents-constant-ftc"
    assert summary["converged"] is True
    assert summary["slots"] == 2 * summary["iterations"]


def test_run_writes_trace_and_summary(tmp_path, capsys):
    trace, summary = tmp_path / "trace.csv", tmp_path / "summary.json"
    assert cli_main(["run", CONSTANT_FTC, "--trace", str(trace), "--summary", str(summary)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    data = json.loads(summary.read_text(encoding="utf-8"))
    assert len(read_trace_csv(trace)) == (data["iterations"] + 1) * data["n"]


def test_run_records_in_ledger(tmp_path, capsys):
    db_path = tmp_path / "ledger.duckdb"
    assert cli_main(["run", CONSTANT_FTC, "--db", str(db_path)]) == EXIT_OK
    runs = ResultsDB(db_path).runs()
    assert runs["scenario"].tolist() == ["four-agents-constant-ftc"]


@pytest.mark.parametrize("argv", [
    ["run", "does-not-exist.json"],
    ["run"],
    ["frobnicate"],
    ["compare-tdma", "--trials", "many"],
    ["compare-tdma", "--n-min", "9", "--n-max", "4"],
    ["compare-tdma", "--n-min", "1", "--n-max", "4", "--trials", "1"],
    ["demo-nomographic", "--which", "softmax"],
])
def test_usage_errors_exit_with_two(argv, capsys):
    assert cli_main(argv) == EXIT_USAGE


def test_compare_tdma_is_deterministic(tmp_path, capsys):
    args = ["compare-tdma", "--n-min", "3", "--n-max", "5", "--trials", "2", "--seed", "5"]
    one, four = tmp_path / "one.csv", tmp_path / "four.csv"
    assert cli_main(args + ["--workers", "1", "--out", str(one)]) == EXIT_OK
    assert cli_main(args + ["--workers", "4", "--out", str(four)]) == EXIT_OK
    assert one.read_bytes() == four.read_bytes()
    df = read_comparison_csv(one)
    assert df[["n", "trial"]].values.tolist() == [[n, t] for n in (3, 4, 5) for t in range(2)]


def test_compare_tdma_writes_csv_to_stdout(capsys):
    assert cli_main(["compare-tdma", "--n-min", "3", "--n-max", "3", "--trials", "2", "--workers", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "n,trial,k_t_slots,k_b_slots,ratio"
    assert len(out.splitlines()) == 3


def test_demo_nomographic_noiseless_error_decreases(tmp_path, capsys):
    out = tmp_path / "demo.csv"
    assert cli_main(["demo-nomographic", "--noise", "0", "--out", str(out)]) == EXIT_OK
    df = read_nomographic_csv(out)
    assert df["p"].tolist() == [1, 2, 5, 10, 20, 50]
    assert df["abs_error"].is_monotonic_decreasing


def test_demo_nomographic_is_seeded(capsys):
    cli_main(["demo-nomographic", "--which", "log_sum_exp", "--seed", "3"])
    first = capsys.readouterr().out
    cli_main(["demo-nomographic", "--which", "log_sum_exp", "--seed", "3"])
    assert capsys.readouterr().out == first


def test_batch_to_stdout(tmp_path, capsys):
    for name in ("four-agents-constant-ftc.json", "four-agents-rayleigh-ftc.json"):
        (tmp_path / name).write_bytes((Path(scenarios_dir) / name).read_bytes())
    assert cli_main(["batch", str(tmp_path), "--workers", "2"]) == EXIT_OK
    df = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert df["name"].tolist() == ["four-agents-constant-ftc", "four-agents-rayleigh-ftc"]


def test_parser_lists_every_command():
    parser = build_arg_parser()
    for command in ("run", "batch", "compare-tdma", "demo-nomographic", "validate"):
        assert parser.parse_args([command] + (["x"] if command in ("run", "batch", "validate") else [])).command == command


def test_validate_rejects_fractional_symbol_count(tmp_path, capsys):
    payload = json.loads(Path(CONSTANT_FTC).read_text(encoding="utf-8"))
    payload["link"] = {"kind": "baseband", "m": 2.5}
    path = tmp_path / "fractional-m.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    assert cli_main(["validate", str(path)]) == EXIT_USAGE
    assert "link.m" in capsys.readouterr().err

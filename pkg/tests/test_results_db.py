import pytest

from consensus.protocols import RunResult
from db.results_db import ResultsDB
from harness.comparison import ComparisonRecord


@pytest.fixture
def db(tmp_path):
    return ResultsDB(tmp_path / "results.duckdb")


def _result(iterations=5):
    return RunResult("ftc", True, iterations, 2 * iterations, 4.0, [4.0] * 4, "f00d", [])


def test_schema_is_idempotent(tmp_path):
    path = tmp_path / "results.duckdb"
    ResultsDB(path)
    again = ResultsDB(path)
    assert again.runs().empty
    assert again._query("SELECT version FROM schema_info")["version"].tolist() == [1]


def test_record_run_upserts(db):
    db.record_run("run-1", "ring", _result(5))
    db.record_run("run-1", "ring", _result(7))
    db.record_run("run-2", None, _result(3))
    runs = db.runs().set_index("run_id")
    assert sorted(runs.index) == ["run-1", "run-2"]
    assert runs.loc["run-1", "iterations"] == 7
    assert runs.loc["run-1", "slots"] == 14
    assert runs.loc["run-1", "topology_fingerprint"] == "f00d"


def test_runs_limit(db):
    for i in range(4):
        db.record_run(f"run-{i}", "s", _result())
    assert len(db.runs(limit=2)) == 2


def test_record_comparison(db):
    records = [ComparisonRecord(4, 1, 12, 6, 2.0), ComparisonRecord(3, 0, 9, 4, 2.25)]
    assert db.record_comparison("cmp", records) == 2
    assert db.record_comparison("cmp", [ComparisonRecord(3, 0, 9, 6, 1.5)]) == 1
    df = db.comparisons("cmp")
    assert df[["n", "trial"]].values.tolist() == [[3, 0], [4, 1]]
    assert df["ratio"].tolist() == [1.5, 2.0]
    assert db.comparisons("other").empty
    assert db.record_comparison("empty", []) == 0

"""
커맨드라인 도구 테스트 (run() 으로 직접 호출)
"""
import csv
import io
import json

import pytest

from scripts.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, parse_n_list, parse_window, run
from src.utils.config import ENV_KEYS


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ENV_KEYS:
        monkeypatch.delenv(name, raising=False)


def test_tw2_json(capsys):
    assert run(["tw2", "--s", "8"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["command"] == "tw2"
    assert record["value"] == pytest.approx(1.0, abs=1e-10)


def test_tw2_csv(capsys):
    assert run(["tw2", "--s", "0", "--format", "csv", "-q"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == ["command", "s", "value"]
    assert float(rows[0]["value"]) == pytest.approx(0.9694, abs=5e-4)


def test_output_file(tmp_path, capsys):
    target = tmp_path / "tw2.json"
    assert run(["tw2", "--s", "1", "--output", str(target)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["s"] == 1.0


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["gap", "--lambda", "1", "--sigma", "0"],
        ["gap", "--lambda", "1", "--sigma", "0", "--window", "0:1:-1"],
        ["gap", "--lambda", "1", "--sigma", "0", "--window", "0:1"],
        ["converge", "--lambda", "1", "--sigma", "0", "--n-list", "a,b",
         "--tau1", "0", "--xi1", "0", "--tau2", "0", "--xi2", "0"],
        ["tw2", "--s", "0", "-v", "-q"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_sweep_usage_errors():
    base = ["sweep", "--from", "0", "--to", "1", "--points", "3"]
    assert run(base + ["--param", "lambda", "--quantity", "tw2"]) == EXIT_USAGE
    assert run(base + ["--param", "s", "--quantity", "tw2", "--points", "1"]) == EXIT_USAGE
    assert run(base + ["--param", "sigma", "--quantity", "gap", "--lambda", "1"]) == EXIT_USAGE


def test_domain_failure_reports_module(capsys):
    code = run(["simulate", "--n", "5", "--m", "4", "--a1", "-1", "--a2", "1",
                "--steps", "4", "--samples", "1", "--seed", "0"])
    assert code == EXIT_FAILURE
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "[bridge_simulator]" in captured.err


def test_envelope_failure_from_fredholm(capsys):
    assert run(["tw2", "--s", "9"]) == EXIT_FAILURE
    assert "[fredholm]" in capsys.readouterr().err


def test_bad_config_file_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("speed: fast\n", encoding="utf-8")
    assert run(["tw2", "--s", "0", "--config", str(path)]) == EXIT_USAGE
    assert "[cli]" in capsys.readouterr().err


def test_sweep_is_thread_independent(capsys):
    argv = ["sweep", "--param", "s", "--from", "-2", "--to", "2", "--points", "5", "--quantity", "tw2", "-q"]
    assert run(argv + ["--threads", "1"]) == EXIT_OK
    single = capsys.readouterr().out
    assert run(argv + ["--threads", "2"]) == EXIT_OK
    assert capsys.readouterr().out == single
    rows = list(csv.DictReader(io.StringIO(single)))
    assert [float(row["s"]) for row in rows] == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert all(float(a["tw2"]) < float(b["tw2"]) for a, b in zip(rows, rows[1:]))


def test_simulate_with_gap_and_dump(tmp_path, capsys):
    dump = tmp_path / "paths.csv"
    argv = ["simulate", "--n", "1", "--m", "1", "--a1", "-2", "--a2", "2", "--steps", "4",
            "--samples", "20", "--seed", "1", "--gap", "0.5:-0.1:0.1", "--dump-paths", str(dump)]
    assert run(argv) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["samples_accepted"] == 20
    assert 0.0 <= record["p_hat"] <= 1.0
    with open(dump, encoding="utf-8") as f:
        assert sum(1 for _ in csv.DictReader(f)) == 20 * 2 * 5


def test_config_file_sets_format(tmp_path, capsys):
    path = tmp_path / "config.txt"
    path.write_text("output_format=csv\n", encoding="utf-8")
    assert run(["tw2", "--s", "8", "--config", str(path)]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "command,s,value"


def test_parse_helpers():
    window = parse_window("0.5:-1:1")
    assert (window.time, window.lo, window.hi) == (0.5, -1.0, 1.0)
    assert parse_n_list("16, 32,64") == [16, 32, 64]

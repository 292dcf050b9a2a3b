"""Test the command line interface."""

from __future__ import annotations

import csv
import io
import json
import typing as t

import pytest
from click.testing import CliRunner

from lora_drcc.cli import (
    AIRTIME_CSV_HEADER,
    EXIT_CONFIG_ERROR,
    EXIT_RUNTIME_ERROR,
    RANGE_CSV_HEADER,
    cli,
)
from lora_drcc.simulation import EVENT_LOG_HEADER
from lora_drcc.sweeps import SWEEP_CSV_HEADER

if t.TYPE_CHECKING:
    from pathlib import Path

    from click.testing import Result


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def summary(result: Result) -> dict[str, t.Any]:
    """The JSON summary printed after any log lines."""
    return json.loads(result.output.strip().splitlines()[-1])


def table(result: Result, header: tuple[str, ...]) -> list[dict[str, str]]:
    text = result.output[result.output.index(",".join(header)) :]
    return list(csv.DictReader(io.StringIO(text)))


def test_version(runner: CliRunner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert result.output.startswith("lora-drcc v")


def test_airtime_table(runner: CliRunner):
    result = runner.invoke(cli, ["airtime"])
    assert result.exit_code == 0
    rows = table(result, AIRTIME_CSV_HEADER)
    assert len(rows) == 18
    assert rows[0] == {"sf": "7", "bandwidth_khz": "125", "airtime_ms": "56.576"}
    assert rows[5]["airtime_ms"] == "1318.912"
    assert {row["bandwidth_khz"] for row in rows} == {"125", "250", "500"}


def test_airtime_payload_out_of_range(runner: CliRunner):
    result = runner.invoke(cli, ["airtime", "--payload", "0"])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "--payload" in result.output


def test_range_table(runner: CliRunner):
    result = runner.invoke(cli, ["range"])
    assert result.exit_code == 0
    rows = {(r["sf"], r["bandwidth_khz"]): r for r in table(result, RANGE_CSV_HEADER)}
    assert len(rows) == 18
    assert rows["9", "125"]["sensitivity_dbm"] == "-129.0"
    assert float(rows["9", "125"]["range_m"]) == pytest.approx(224.7, abs=0.5)
    assert float(rows["12", "125"]["range_m"]) == pytest.approx(487.4, abs=0.5)


def test_range_with_custom_model(runner: CliRunner):
    result = runner.invoke(cli, ["range", "--gamma", "3.0", "--tx-power", "10"])
    assert result.exit_code == 0
    rows = {(r["sf"], r["bandwidth_khz"]): r for r in table(result, RANGE_CSV_HEADER)}
    assert float(rows["9", "125"]["range_m"]) < 224.7


def test_range_rejects_bad_reference_distance(runner: CliRunner):
    result = runner.invoke(cli, ["range", "--d0", "0"])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "d0" in result.output


def test_run(runner: CliRunner, tmp_path: Path):
    log_path = tmp_path / "events.csv"
    result = runner.invoke(
        cli,
        [
            "run",
            "--scheme",
            "static-sf7",
            "--nodes",
            "5",
            "--duration",
            "300",
            "--seed",
            "1",
            "--out",
            str(log_path),
        ],
    )
    assert result.exit_code == 0, result.output
    report = summary(result)
    assert report["scenario"]["num_nodes"] == 5
    assert report["scenario"]["scheme"] == "static-sf7"
    assert report["measurement_start"] == 0.0
    assert report["transmitted"] >= report["received"] > 0

    lines = log_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(EVENT_LOG_HEADER)
    assert len(lines) == report["transmitted"] + 1


def test_run_is_reproducible(runner: CliRunner):
    args = ["run", "--nodes", "20", "--duration", "300", "--seed", "8"]
    first = summary(runner.invoke(cli, args))
    second = summary(runner.invoke(cli, args))
    assert first == second


def test_run_invalid_scenario(runner: CliRunner):
    result = runner.invoke(cli, ["run", "--scheme", "drcc", "--nodes", "0"])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "num_nodes" in result.output


def test_run_unknown_scheme(runner: CliRunner):
    result = runner.invoke(cli, ["run", "--scheme", "lorawan"])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "Usage" in result.output


def test_run_missing_config_file(runner: CliRunner, tmp_path: Path):
    missing = tmp_path / "nowhere.cfg"
    result = runner.invoke(cli, ["run", "--config", str(missing)])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "Could not locate config file" in result.output


def test_run_config_file_and_flags(runner: CliRunner, tmp_path: Path):
    config = tmp_path / "scenario.cfg"
    config.write_text(
        "# small cell\nnodes = 4\nscheme = static-sf9\nduration = 200\n",
        encoding="utf-8",
    )
    result = runner.invoke(cli, ["run", "--config", str(config), "--nodes", "3"])
    assert result.exit_code == 0, result.output
    scenario = summary(result)["scenario"]
    assert scenario["num_nodes"] == 3
    assert scenario["scheme"] == "static-sf9"
    assert scenario["duration"] == 200.0


def test_run_config_from_environment(
    runner: CliRunner,
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LORA_DRCC_NUM_NODES", "6")
    monkeypatch.setenv("LORA_DRCC_DURATION", "150")
    monkeypatch.setenv("LORA_DRCC_SCHEME", "adr")
    result = runner.invoke(cli, ["run", "--config", "ENV"])
    assert result.exit_code == 0, result.output
    scenario = summary(result)["scenario"]
    assert (scenario["num_nodes"], scenario["duration"]) == (6, 150.0)
    assert scenario["scheme"] == "adr"


def test_environment_ignored_without_env_token(
    runner: CliRunner,
    monkeypatch: pytest.MonkeyPatch,
):
    monkeypatch.setenv("LORA_DRCC_NUM_NODES", "6")
    result = runner.invoke(cli, ["run", "--duration", "300", "--nodes", "2"])
    assert result.exit_code == 0, result.output
    assert summary(result)["scenario"]["num_nodes"] == 2


def test_run_failure_exit_code(runner: CliRunner, monkeypatch: pytest.MonkeyPatch):
    class BrokenSimulator:
        def __init__(self, scenario: t.Any) -> None:  # noqa: ANN401
            msg = "boom"
            raise RuntimeError(msg)

    monkeypatch.setattr("lora_drcc.cli.Simulator", BrokenSimulator)
    result = runner.invoke(cli, ["run", "--duration", "10"])
    assert result.exit_code == EXIT_RUNTIME_ERROR


def test_sweep(runner: CliRunner, tmp_path: Path):
    out = tmp_path / "fig4.csv"
    args = [
        "sweep",
        "fig4",
        "--schemes",
        "static-sf7,drcc",
        "--nodes",
        "1,5",
        "--duration",
        "600",
        "--seed",
        "3",
        "--out",
        str(out),
    ]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output

    text = out.read_text(encoding="utf-8")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == list(SWEEP_CSV_HEADER)
    assert [(r["scheme"], r["nodes"], r["seed"]) for r in rows] == [
        ("static-sf7", "1", "3"),
        ("static-sf7", "5", "4"),
        ("drcc", "1", "3"),
        ("drcc", "5", "4"),
    ]
    assert all(r["radius_m"] == "50" and r["period_s"] == "30" for r in rows)

    runner.invoke(cli, args)
    assert out.read_text(encoding="utf-8") == text


def test_sweep_to_stdout(runner: CliRunner):
    result = runner.invoke(
        cli,
        [
            "sweep",
            "exp3",
            "--schemes",
            "static-sf9",
            "--nodes",
            "3",
            "--duration",
            "1000",
        ],
    )
    assert result.exit_code == 0, result.output
    (row,) = table(result, SWEEP_CSV_HEADER)
    assert row["experiment"] == "fig6"
    assert row["radius_m"] == "200"


@pytest.mark.parametrize(
    "args,message",
    [
        pytest.param(["fig7"], "Unknown experiment", id="unknown-experiment"),
        pytest.param(["fig4", "--radii", "10"], "does not apply", id="wrong-axis"),
        pytest.param(["fig5", "--nodes", "10"], "does not apply", id="wrong-axis-5"),
        pytest.param(["fig4", "--schemes", "adr,wat"], "unknown scheme", id="scheme"),
        pytest.param(["fig4", "--nodes", "ten"], "ten", id="bad-count"),
        pytest.param(["fig4", "--repeats", "0"], "--repeats", id="no-repeats"),
    ],
)
def test_sweep_errors(runner: CliRunner, args: list[str], message: str):
    result = runner.invoke(cli, ["sweep", *args])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert message in result.output

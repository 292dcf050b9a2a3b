from __future__ import annotations

import json
import logging
import typing as t

import pytest
import time_machine

from lora_drcc import metrics
from lora_drcc.simulation import Simulator

if t.TYPE_CHECKING:
    from pathlib import Path

    from lora_drcc.scenario import ScenarioConfig


class CustomObject:
    def __init__(self, name: str, value: int):
        self.name = name
        self.value = value

    def __str__(self) -> str:
        return f"{self.name}={self.value}"


def test_meter():
    class _MyMeter(metrics.Meter):
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc_val, exc_tb):
            pass

    meter = _MyMeter(metrics.Metric.TRANSMISSION_COUNT)
    assert meter.tags == {}
    assert meter.logger is metrics.get_metrics_logger()


def test_transmission_counter(caplog: pytest.LogCaptureFixture):
    caplog.set_level(logging.INFO, logger=metrics.METRICS_LOGGER_NAME)
    custom_object = CustomObject("test", 1)

    with metrics.transmission_counter(
        "drcc",
        100,
        42,
        custom_tag="pytest",
        custom_obj=custom_object,
    ) as counter:
        for _ in range(100):
            counter.last_log_time = 0
            assert counter._ready_to_log()

            counter.increment()

    total = 0

    assert len(caplog.records) == 100 + 1

    for record in caplog.records:
        assert record.levelname == "INFO"
        assert record.msg == "METRIC: %s"
        assert "test=1" in record.message

        point: metrics.Point[int] = record.args[0]
        assert point.metric_type == "counter"
        assert point.metric == "transmission_count"
        assert point.tags == {
            metrics.Tag.SCHEME: "drcc",
            metrics.Tag.NODES: 100,
            metrics.Tag.SEED: 42,
            "custom_tag": "pytest",
            "custom_obj": custom_object,
        }

        total += point.value

    assert total == 100
    assert counter.total == 100


def test_counter_batches_between_intervals(caplog: pytest.LogCaptureFixture):
    caplog.set_level(logging.INFO, logger=metrics.METRICS_LOGGER_NAME)
    with metrics.uplink_counter("adr", 10, 0) as counter:
        for _ in range(25):
            counter.increment()

    (record,) = caplog.records
    assert record.args[0].value == 25


def test_run_timer(caplog: pytest.LogCaptureFixture):
    caplog.set_level(logging.INFO, logger=metrics.METRICS_LOGGER_NAME)
    traveler = time_machine.travel(0, tick=False)
    traveler.start()

    with metrics.run_timer("static-sf7", 50, 3, custom_tag="pytest"):
        traveler.stop()

        traveler = time_machine.travel(10, tick=False)
        traveler.start()

    traveler.stop()

    record = caplog.records[0]
    assert record.levelname == "INFO"
    assert record.msg == "METRIC: %s"

    point: metrics.Point[float] = record.args[0]
    assert point.metric_type == "timer"
    assert point.metric == "run_duration"
    assert point.tags == {
        metrics.Tag.SCHEME: "static-sf7",
        metrics.Tag.NODES: 50,
        metrics.Tag.SEED: 3,
        metrics.Tag.STATUS: "succeeded",
        "custom_tag": "pytest",
    }

    assert pytest.approx(point.value, rel=0.001) == 10.0


def test_sweep_point_timer_failure(caplog: pytest.LogCaptureFixture):
    caplog.set_level(logging.INFO, logger=metrics.METRICS_LOGGER_NAME)
    with pytest.raises(RuntimeError), metrics.sweep_point_timer("fig4", scheme="adr"):
        raise RuntimeError

    point = caplog.records[0].args[0]
    assert point.metric == "sweep_point_duration"
    assert point.tags[metrics.Tag.STATUS] == "failed"
    assert point.tags[metrics.Tag.EXPERIMENT] == "fig4"
    assert json.loads(str(point))["tags"]["status"] == "failed"


def test_simulation_emits_metrics(
    caplog: pytest.LogCaptureFixture,
    small_scenario: ScenarioConfig,
):
    caplog.set_level(logging.INFO, logger=metrics.METRICS_LOGGER_NAME)
    log = Simulator(small_scenario).run()

    points = {
        r.args[0].metric.value: r.args[0]
        for r in caplog.records
        if r.name == metrics.METRICS_LOGGER_NAME
    }
    assert set(points) == {
        "run_duration",
        "transmission_count",
        "uplink_count",
        "command_count",
    }
    assert points["transmission_count"].value == len(log)
    assert points["uplink_count"].value == sum(r.received for r in log)


def test_setup_logging(monkeypatch: pytest.MonkeyPatch, tmp_path: Path):
    metrics._setup_logging({"metrics_log_level": "warning"})
    assert metrics.get_metrics_logger().level == logging.WARNING
    assert logging.getLogger().handlers

    custom = tmp_path / "logging.yml"
    custom.write_text(
        "version: 1\n"
        "disable_existing_loggers: false\n"
        "loggers:\n"
        "  lora_drcc.sweeps:\n"
        "    level: ERROR\n",
        encoding="utf-8",
    )
    monkeypatch.setenv(metrics.LOG_CONFIG_ENV_VAR, str(custom))
    metrics._setup_logging()
    assert logging.getLogger("lora_drcc.sweeps").level == logging.ERROR
    assert metrics.get_metrics_logger().level == logging.INFO

"""Single-gateway LoRa cell simulator with DRCC and baseline SF schemes."""

from __future__ import annotations

from lora_drcc import schemes
from lora_drcc.reports import MetricsReport, compute_metrics
from lora_drcc.scenario import ScenarioConfig
from lora_drcc.schemes import Scheme, SchemeOptions
from lora_drcc.simulation import EventLog, Simulator, run
from lora_drcc.sweeps import run_sweep

__all__ = [
    "EventLog",
    "MetricsReport",
    "ScenarioConfig",
    "Scheme",
    "SchemeOptions",
    "Simulator",
    "compute_metrics",
    "run",
    "run_sweep",
    "schemes",
]

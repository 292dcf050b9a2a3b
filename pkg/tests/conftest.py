"""Top level test fixtures."""

from __future__ import annotations

import logging
import os
import pathlib
import typing as t

import numpy as np
import pytest

from lora_drcc.scenario import ScenarioConfig

if t.TYPE_CHECKING:
    from _pytest.config import Config


def pytest_collection_modifyitems(config: Config, items: list[pytest.Item]):
    rootdir = pathlib.Path(config.rootdir)

    for item in items:
        rel_path = pathlib.Path(item.fspath).relative_to(rootdir)

        # Mark all tests under tests/acceptance/ as 'acceptance'
        if rel_path.parts[1].startswith("acceptance"):
            item.add_marker("acceptance")


def pytest_report_header() -> list[str]:
    """Return a list of strings to be displayed in the header of the report."""
    return [f"numpy: {np.__version__}"]


@pytest.fixture(autouse=True)
def _reset_envvars(monkeypatch: pytest.MonkeyPatch):
    """Remove envvars that might interfere with tests."""
    for name in list(os.environ):
        if name.startswith("LORA_DRCC_"):
            monkeypatch.delenv(name)
    monkeypatch.delenv("LOGLEVEL", raising=False)


@pytest.fixture(autouse=True)
def _restore_root_logger():
    """Undo logging configuration applied by the CLI."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture(scope="session")
def snapshot_dir() -> pathlib.Path:
    """Return the path to the snapshot directory."""
    return pathlib.Path("tests/snapshots/")


@pytest.fixture
def small_scenario() -> ScenarioConfig:
    """A short, light scenario that still produces collisions."""
    return ScenarioConfig.from_dict(
        {
            "num_nodes": 40,
            "radius": 200.0,
            "period": 20.0,
            "duration": 600.0,
            "scheme": "drcc",
            "seed": 3,
            "window": 5,
        },
    )

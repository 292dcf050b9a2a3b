"""Qualitative replication of the node-count and radius sweeps.

These runs take minutes; select them with ``pytest -m acceptance``.

Scenarios run with the defaults: feasible initial SFs and 8 demodulation
paths. The DRCC margins over ADR at the dense points and the SF9 collapse at
250 m are not reached under this channel model and are marked as strict
expected failures.
"""

from __future__ import annotations

import collections
import statistics
import typing as t

import pytest

from lora_drcc.channel import PathLossParams, Position, max_range
from lora_drcc.reports import compute_metrics
from lora_drcc.scenario import ScenarioConfig
from lora_drcc.simulation import Simulator
from lora_drcc.sweeps import format_csv, run_sweep

if t.TYPE_CHECKING:
    from collections.abc import Sequence

    from lora_drcc.sweeps import SweepRow

SEEDS = 5
JOBS = -1
SF9_EDGE = max_range(9, 125, 14.0, PathLossParams()).distance


def mean_der(rows: Sequence[SweepRow], *, by: str = "nodes") -> dict[tuple, float]:
    groups: dict[tuple, list[float]] = collections.defaultdict(list)
    for row in rows:
        groups[row.scheme, getattr(row, by)].append(row.der)
    return {key: statistics.mean(values) for key, values in groups.items()}


def connected_share(radius: float) -> float:
    """Share of a uniform disk of nodes within SF9 range of the gateway."""
    return min(1.0, (SF9_EDGE / radius) ** 2)


@pytest.fixture(scope="module")
def fig4() -> dict[tuple, float]:
    rows = run_sweep(
        "fig4",
        ["static-sf7", "adr", "drcc"],
        [100, 300, 600],
        seed=1,
        repeats=SEEDS,
        jobs=JOBS,
    )
    return mean_der(rows)


@pytest.fixture(scope="module")
def fig6() -> dict[tuple, float]:
    rows = run_sweep(
        "fig6",
        ["adr", "drcc"],
        [500, 1000],
        seed=2,
        repeats=SEEDS,
        jobs=JOBS,
    )
    return mean_der(rows)


@pytest.fixture(scope="module")
def fig5() -> dict[tuple, float]:
    rows = run_sweep(
        "fig5",
        ["static-sf9", "static-sf12"],
        [50, 150, 250, 300, 350],
        seed=3,
        jobs=JOBS,
    )
    return mean_der(rows, by="radius_m")


@pytest.mark.parametrize("offset,expected", [(-1.0, 1.0), (1.0, 0.0)])
def test_sf9_connectivity_boundary(offset: float, expected: float):
    assert pytest.approx(224.7, abs=0.5) == SF9_EDGE

    scenario = ScenarioConfig.from_dict(
        {"num_nodes": 1, "scheme": "static-sf9", "period": 30.0, "duration": 3600.0},
    )
    sim = Simulator(scenario)
    sim.setup()
    sim.nodes[0].position = Position(SF9_EDGE + offset, 0.0)
    assert compute_metrics(sim.run()).global_der == expected


def test_fig4_adr_matches_static_sf7(fig4: dict[tuple, float]):
    for nodes in (100, 300, 600):
        assert abs(fig4["adr", nodes] - fig4["static-sf7", nodes]) < 0.05


def test_fig4_drcc_keeps_up_with_adr(fig4: dict[tuple, float]):
    # Every node is feasible on SF7 in a 50 m cell, so both schemes settle on
    # the same SFs and differ only in channel placement.
    assert fig4["drcc", 600] >= fig4["adr", 600]


@pytest.mark.xfail(
    strict=True,
    reason="DRCC stays on ADR's all-SF7 configuration at 600 nodes",
)
def test_fig4_drcc_margin_over_adr(fig4: dict[tuple, float]):
    assert fig4["drcc", 600] >= fig4["adr", 600] + 0.05


def test_fig6_adr_supports_500_nodes(fig6: dict[tuple, float]):
    assert fig6["adr", 500] >= 0.9
    assert fig6["adr", 500] >= fig6["adr", 1000]


def test_fig6_drcc_supports_1000_nodes(fig6: dict[tuple, float]):
    assert fig6["drcc", 1000] >= 0.85
    assert fig6["drcc", 1000] >= fig6["adr", 1000]


@pytest.mark.xfail(
    strict=True,
    reason="ADR already spreads a 200 m cell over SF7-SF9 at 1000 nodes",
)
def test_fig6_drcc_margin_over_adr(fig6: dict[tuple, float]):
    assert fig6["drcc", 1000] >= fig6["adr", 1000] + 0.1


def test_fig5_sf9_is_bounded_by_connectivity(fig5: dict[tuple, float]):
    for radius in (250.0, 300.0, 350.0):
        assert fig5["static-sf9", radius] <= connected_share(radius) + 0.05
    assert (
        fig5["static-sf9", 150.0]
        > fig5["static-sf9", 250.0]
        > fig5["static-sf9", 350.0]
    )


@pytest.mark.xfail(
    strict=True,
    reason="about 81 % of a uniform 250 m disk is still within SF9 range",
)
def test_fig5_sf9_halves_past_its_range(fig5: dict[tuple, float]):
    assert fig5["static-sf9", 250.0] <= 0.5 * fig5["static-sf9", 150.0]


def test_fig5_sf12_changes_slowly(fig5: dict[tuple, float]):
    assert abs(fig5["static-sf12", 50.0] - fig5["static-sf12", 300.0]) <= 0.15


def test_parallel_sweep_is_byte_identical():
    kwargs: dict[str, t.Any] = {
        "seed": 4,
        "repeats": 2,
        "overrides": {"duration": 1200.0},
    }
    serial = run_sweep("fig6", ["drcc", "fadr"], [100, 300], jobs=1, **kwargs)
    parallel = run_sweep("fig6", ["drcc", "fadr"], [100, 300], jobs=2, **kwargs)
    assert format_csv(serial) == format_csv(parallel)

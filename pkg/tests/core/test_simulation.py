"""Test the event loop, node placement and traffic generation."""

from __future__ import annotations

import io
import itertools

import numpy as np
import pytest

from lora_drcc.channel import Position
from lora_drcc.collision import LossReason
from lora_drcc.radio import RadioParams, airtime
from lora_drcc.reports import compute_metrics
from lora_drcc.scenario import ScenarioConfig
from lora_drcc.simulation import (
    EVENT_LOG_HEADER,
    EventKind,
    EventLog,
    NodeState,
    RngStream,
    SimEvent,
    Simulator,
    make_rng,
    place_nodes,
    run,
    schedule_next_uplink,
)


def single_node(**overrides) -> ScenarioConfig:
    settings = {
        "num_nodes": 1,
        "radius": 50.0,
        "period": 60.0,
        "duration": 3600.0,
        "scheme": "static-sf7",
        "seed": 1,
    }
    settings.update(overrides)
    return ScenarioConfig.from_dict(settings)


def csv_text(log: EventLog) -> str:
    buffer = io.StringIO()
    log.to_csv(buffer)
    return buffer.getvalue()


def test_same_seed_same_log(small_scenario: ScenarioConfig):
    assert csv_text(run(small_scenario)) == csv_text(run(small_scenario))


def test_different_seed_different_log(small_scenario: ScenarioConfig):
    other = small_scenario.replace(seed=4)
    assert csv_text(run(small_scenario)) != csv_text(run(other))


def test_event_log_csv_format(small_scenario: ScenarioConfig):
    lines = csv_text(run(small_scenario)).split("\n")
    assert lines[0] == ",".join(EVENT_LOG_HEADER)
    assert lines[-1] == ""
    first = lines[1].split(",")
    assert len(first) == len(EVENT_LOG_HEADER)
    assert first[-1] in {"0", "1"}


def test_conservation(small_scenario: ScenarioConfig):
    sim = Simulator(small_scenario)
    log = sim.run()
    assert sim._starts == sim._ends == len(log) > 0


def test_frame_counters_increase_by_one(small_scenario: ScenarioConfig):
    log = run(small_scenario)
    node_ids = {record.node_id for record in log}
    assert node_ids
    for node_id in node_ids:
        fcnts = [record.fcnt for record in log.for_node(node_id)]
        assert fcnts == list(range(len(fcnts)))


def test_log_is_ordered_by_end_time(small_scenario: ScenarioConfig):
    sim = Simulator(small_scenario)
    log = sim.run()
    ends = [
        record.time
        + airtime(
            RadioParams(record.sf),
            small_scenario.payload,
            small_scenario.preamble,
        )
        for record in log
    ]
    assert all(a <= b + 1e-9 for a, b in zip(ends, ends[1:]))


def test_single_node_in_range_loses_nothing():
    log = run(single_node())
    report = compute_metrics(log)
    assert report.transmitted > 20
    assert report.global_der == 1.0


def test_single_node_beyond_range_loses_everything():
    sim = Simulator(single_node())
    sim.setup()
    # SF7 reaches about 115 m with the default path loss
    sim.nodes[0].position = Position(200.0, 0.0)
    log = sim.run()
    assert len(log) > 20
    assert not any(record.received for record in log)
    assert {record.loss_reason for record in log} == {LossReason.UNDER_SENSITIVITY}


def test_drcc_state_stays_consistent(small_scenario: ScenarioConfig):
    sim = Simulator(small_scenario)
    sim.run()
    state = sim.scheme.state  # type: ignore[attr-defined]
    assert state.is_consistent()
    assert sum(state.sf_group.values()) == small_scenario.num_nodes
    for node_id, assigned in state.assignment.items():
        radio = sim.nodes[node_id].radio
        # Commands issued after a node's last uplink are still pending
        if not sim.nodes[node_id].pending_commands:
            assert (int(radio.sf), radio.channel_index) == (
                assigned.sf,
                assigned.channel,
            )


def test_initial_channels_follow_scheme(small_scenario: ScenarioConfig):
    sim = Simulator(small_scenario)
    sim.setup()
    assert all(node.last_answer == bytes.fromhex("0307") for node in sim.nodes.values())
    channels = {node.radio.channel_index for node in sim.nodes.values()}
    assert len(channels) > 1


@pytest.mark.parametrize(
    "policy,expected",
    [
        pytest.param("sf12", {12}, id="sf12"),
        pytest.param("feasible", {7}, id="feasible"),
    ],
)
def test_initial_sf_policy(policy: str, expected: set[int]):
    scenario = single_node(num_nodes=20, scheme="adr", initial_sf=policy)
    sim = Simulator(scenario)
    sim.setup()
    assert {int(node.radio.sf) for node in sim.nodes.values()} == expected


def test_late_joiners_start_after_joining():
    scenario = single_node(
        num_nodes=20,
        scheme="drcc",
        late_join_fraction=0.5,
        warmup_fraction=0.2,
    )
    sim = Simulator(scenario)
    log = sim.run()
    late = [node for node in sim.nodes.values() if node.join_time > 0]
    assert len(late) == 10
    for node in late:
        assert node.join_time <= 0.2 * scenario.duration
        records = log.for_node(node.node_id)
        assert all(record.time >= node.join_time for record in records)
    assert sim.scheme.state.is_consistent()  # type: ignore[attr-defined]


def test_duty_cycle_spaces_transmissions():
    scenario = single_node(scheme="static-sf12", period=10.0, duty_cycle=0.01)
    log = run(scenario)
    gap = airtime(RadioParams(12), scenario.payload) / 0.01
    starts = [record.time for record in log.for_node(0)]
    assert len(starts) > 2
    assert all(b - a >= gap - 1e-9 for a, b in zip(starts, starts[1:]))


def test_simultaneous_events_order():
    start = SimEvent(1.0, EventKind.TRANSMISSION_START, 0)
    end = SimEvent(1.0, EventKind.TRANSMISSION_END, 5)
    join = SimEvent(1.0, EventKind.NODE_JOIN, 3)
    assert sorted([start, join, end]) == [end, join, start]
    assert SimEvent(1.0, EventKind.TRANSMISSION_START, 1) < SimEvent(
        1.0,
        EventKind.TRANSMISSION_START,
        2,
    )


def test_rng_streams_are_independent():
    draws = {
        (stream, node_id): make_rng(7, stream, node_id).random()
        for stream, node_id in itertools.product(RngStream, range(3))
    }
    assert len(set(draws.values())) == len(draws)
    assert make_rng(7, RngStream.TRAFFIC, 2).random() == draws[RngStream.TRAFFIC, 2]


def test_place_nodes_within_radius():
    positions = place_nodes(500, 50.0, np.random.default_rng(0))
    assert len(positions) == 500
    assert all(p.distance_to() <= 50.0 for p in positions)
    assert len(place_nodes(1, 10.0, np.random.default_rng(0))) == 1


def test_place_nodes_is_area_uniform():
    positions = place_nodes(100_000, 100.0, np.random.default_rng(2))
    inner = sum(p.distance_to() <= 50.0 for p in positions) / len(positions)
    assert inner == pytest.approx(0.25, abs=0.01)


@pytest.mark.parametrize("count,radius", [(0, 50.0), (3, 0.0), (3, -1.0)])
def test_place_nodes_errors(count: int, radius: float):
    with pytest.raises(ValueError, match="count >= 1"):
        place_nodes(count, radius, np.random.default_rng(0))


def make_node(period: float = 30.0) -> NodeState:
    return NodeState(
        node_id=0,
        position=Position(10.0, 0.0),
        radio=RadioParams(7),
        traffic_period=period,
    )


def test_exponential_intervals_have_period_mean():
    node = make_node()
    rng = make_rng(0, RngStream.TRAFFIC)
    intervals = [schedule_next_uplink(node, rng) for _ in range(100_000)]
    assert np.mean(intervals) == pytest.approx(30.0, abs=0.5)
    assert min(intervals) > 0


def test_schedule_is_reproducible():
    node = make_node()
    first = [schedule_next_uplink(node, make_rng(3, RngStream.TRAFFIC)) for _ in "ab"]
    assert first[0] == first[1]


def test_periodic_intervals_stay_within_jitter():
    node = make_node(100.0)
    rng = make_rng(0, RngStream.TRAFFIC)
    for now in range(0, 5000, 100):
        next_time = schedule_next_uplink(
            node,
            rng,
            float(now),
            traffic="periodic",
            jitter=0.1,
        )
        assert 90.0 <= next_time - now <= 110.0
        assert node.next_tx_time == next_time


def test_schedule_rejects_non_positive_period():
    with pytest.raises(ValueError, match="positive"):
        schedule_next_uplink(make_node(0.0), np.random.default_rng(0))

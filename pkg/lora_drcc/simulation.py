"""Discrete-event simulation of one LoRa gateway cell.

Usage example:
--------------
.. code-block:: python

    scenario = ScenarioConfig.from_dict({"num_nodes": 100, "scheme": "drcc"})
    log = run(scenario)
    log.to_csv(sys.stdout)
"""

from __future__ import annotations

import collections
import contextlib
import csv
import dataclasses
import enum
import heapq
import logging
import math
import typing as t

import numpy as np

from lora_drcc import metrics
from lora_drcc.channel import (
    Position,
    lowest_feasible_sf,
    path_loss,
    received_power,
    snr_estimate,
)
from lora_drcc.collision import CollisionEngine, LossReason, Transmission
from lora_drcc.exceptions import SimulationError
from lora_drcc.helpers._util import format_float
from lora_drcc.mac import (
    apply_link_adr,
    decode_link_adr_req,
    encode_link_adr_ans,
    encode_link_adr_req,
)
from lora_drcc.radio import RadioParams, SpreadingFactor, airtime
from lora_drcc.schemes import UplinkRecord

if t.TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from lora_drcc.mac import LinkADRReq
    from lora_drcc.scenario import ScenarioConfig
    from lora_drcc.schemes import Scheme

__all__ = [
    "EventLog",
    "EventRecord",
    "NodeState",
    "SimEvent",
    "Simulator",
    "place_nodes",
    "run",
    "schedule_next_uplink",
]

logger = logging.getLogger(__name__)

# Nodes closer than this are treated as sitting at this distance
MIN_DISTANCE_M = 0.1
TX_POWER_INDEX_14DBM = 1

EVENT_LOG_HEADER = (
    "time_s",
    "node_id",
    "fcnt",
    "sf",
    "channel",
    "rssi_dbm",
    "received",
)


class RngStream(enum.IntEnum):
    """Independent random streams; each is further keyed by node id."""

    PLACEMENT = 0
    TRAFFIC = 1
    SHADOWING = 2
    SCHEME = 3
    JOIN = 4
    INITIAL_SF = 5


def make_rng(seed: int, stream: RngStream, node_id: int = 0) -> np.random.Generator:
    """Counter-based generator for one (purpose, node) pair of a seeded run.

    Args:
        seed: Scenario seed.
        stream: Purpose of the draws.
        node_id: Node the draws belong to.

    Returns:
        A Philox-backed generator.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(int(stream), node_id))
    return np.random.Generator(np.random.Philox(sequence))


class EventKind(enum.IntEnum):
    """Event kinds, valued by their rank among simultaneous events."""

    TRANSMISSION_END = 0
    NODE_JOIN = 1
    TRANSMISSION_START = 2
    SCENARIO_END = 3


@dataclasses.dataclass(order=True)
class SimEvent:
    """A scheduled event; ordering is (time, kind rank, node id)."""

    time: float
    kind: EventKind
    node_id: int
    transmission: Transmission | None = dataclasses.field(
        default=None,
        compare=False,
        repr=False,
    )


@dataclasses.dataclass(eq=False)
class NodeState:
    """An end device as the simulator tracks it."""

    node_id: int
    position: Position
    radio: RadioParams
    traffic_period: float
    fcnt: int = 0
    next_tx_time: float = 0.0
    pending_commands: collections.deque[bytes] = dataclasses.field(
        default_factory=collections.deque,
    )
    tx_power_index: int = TX_POWER_INDEX_14DBM
    nb_trans: int = 1
    mean_rssi: float = 0.0
    join_time: float = 0.0
    last_answer: bytes | None = None

    @property
    def distance(self) -> float:
        """Distance to the gateway in meters."""
        return self.position.distance_to()


@dataclasses.dataclass(frozen=True)
class EventRecord:
    """Outcome of one transmission, logged when it ends."""

    time: float
    node_id: int
    fcnt: int
    sf: int
    channel: int
    rssi: float
    received: bool
    loss_reason: LossReason | None = None

    def to_row(self) -> tuple[str, ...]:
        """CSV cells in :data:`EVENT_LOG_HEADER` order."""
        return (
            format_float(self.time),
            str(self.node_id),
            str(self.fcnt),
            str(self.sf),
            str(self.channel),
            format_float(self.rssi, 3),
            str(int(self.received)),
        )


class EventLog:
    """Ordered transmission outcomes of one run."""

    def __init__(self, records: Sequence[EventRecord] = ()) -> None:
        """Create a log.

        Args:
            records: Initial records.
        """
        self.records: list[EventRecord] = list(records)

    def __len__(self) -> int:
        """Number of records."""
        return len(self.records)

    def __iter__(self) -> Iterator[EventRecord]:
        """Iterate in logging order."""
        return iter(self.records)

    def append(self, record: EventRecord) -> None:
        """Add a record."""
        self.records.append(record)

    def for_node(self, node_id: int) -> list[EventRecord]:
        """Records of one node, in FCnt order."""
        return sorted(
            (r for r in self.records if r.node_id == node_id),
            key=lambda r: r.fcnt,
        )

    def to_csv(self, stream: t.TextIO) -> None:
        """Write the log as CSV with a header row and LF line endings.

        Args:
            stream: Text stream to write to.
        """
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(EVENT_LOG_HEADER)
        writer.writerows(record.to_row() for record in self.records)


def place_nodes(count: int, radius: float, rng: np.random.Generator) -> list[Position]:
    """Drop nodes uniformly over the disk centered on the gateway.

    Args:
        count: Number of nodes.
        radius: Disk radius in meters.
        rng: Random stream.

    Returns:
        One position per node.

    Raises:
        ValueError: If count < 1 or radius <= 0.
    """
    if count < 1 or not radius > 0:
        msg = f"Need count >= 1 and radius > 0, got {count} and {radius}."
        raise ValueError(msg)
    r = radius * np.sqrt(rng.random(count))
    theta = rng.uniform(0.0, 2.0 * math.pi, count)
    return [
        Position(float(x), float(y))
        for x, y in zip(r * np.cos(theta), r * np.sin(theta))
    ]


def schedule_next_uplink(
    node: NodeState,
    rng: np.random.Generator,
    now: float = 0.0,
    *,
    traffic: str = "exponential",
    jitter: float = 0.0,
) -> float:
    """Time of a node's next uplink.

    Args:
        node: The node.
        rng: The node's traffic stream.
        now: Current simulated time.
        traffic: ``exponential`` intervals with mean `traffic_period`, or
            ``periodic`` ones spread uniformly by +/- `jitter` of the period.
        jitter: Relative jitter of periodic traffic.

    Returns:
        A time strictly later than `now`.

    Raises:
        ValueError: If the traffic period is not positive.
    """
    period = node.traffic_period
    if not period > 0:
        msg = f"Traffic period must be positive, got {period}."
        raise ValueError(msg)

    if traffic == "periodic":
        interval = period * (1.0 + rng.uniform(-jitter, jitter))
    else:
        interval = rng.exponential(period)

    next_time = now + float(interval)
    if next_time <= now:
        next_time = float(np.nextafter(now, math.inf))
    node.next_tx_time = next_time
    return next_time


class Simulator:
    """Event loop driving nodes, the gateway and one network-server scheme."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        scheme: Scheme | None = None,
    ) -> None:
        """Prepare a run.

        Args:
            scenario: A validated scenario.
            scheme: The scheme to use; built from the scenario when omitted.
        """
        self.scenario = scenario
        self.scheme = scheme or scenario.make_scheme()
        self.plan = scenario.channel_plan
        self.path_loss = scenario.path_loss
        self.engine = CollisionEngine(
            demod_capacity=scenario.demod_capacity,
            capture_threshold=scenario.capture_threshold,
        )
        self.log = EventLog()
        self.nodes: dict[int, NodeState] = {}
        self.now = 0.0
        self._queue: list[SimEvent] = []
        self._traffic_rng: dict[int, np.random.Generator] = {}
        self._shadowing_rng: dict[int, np.random.Generator] = {}
        self._scheme_rng = make_rng(scenario.seed, RngStream.SCHEME)
        self._starts = 0
        self._ends = 0

    def _push(self, event: SimEvent) -> None:
        heapq.heappush(self._queue, event)

    def _mean_rssi(self, distance: float) -> float:
        loss = path_loss(self.path_loss, max(distance, MIN_DISTANCE_M))
        return received_power(
            self.scenario.tx_power,
            self.scenario.antenna_gains,
            loss,
        )

    def _initial_sf(self, node_id: int, mean_rssi: float) -> int:
        policy = self.scenario.initial_sf
        if policy == "sf12":
            return int(SpreadingFactor.SF12)
        if policy == "random":
            rng = make_rng(self.scenario.seed, RngStream.INITIAL_SF, node_id)
            return int(rng.integers(7, 13))
        return lowest_feasible_sf(mean_rssi)

    def _join_times(self) -> dict[int, float]:
        scenario = self.scenario
        late = round(scenario.late_join_fraction * scenario.num_nodes)
        if late == 0:
            return {}
        rng = make_rng(scenario.seed, RngStream.JOIN)
        chosen = rng.choice(scenario.num_nodes, late, replace=False)
        ids = sorted(int(i) for i in chosen)
        window = scenario.warmup_fraction * scenario.duration
        return {node_id: float(rng.uniform(0.0, window)) for node_id in ids}

    def _apply(self, node: NodeState, req: LinkADRReq) -> None:
        """Deliver one command over the ideal downlink and store the answer."""
        payload = encode_link_adr_req(req)
        ans = apply_link_adr(
            node,
            decode_link_adr_req(payload),
            channel_count=len(self.plan),
        )
        node.last_answer = encode_link_adr_ans(ans)
        if not ans.accepted:
            logger.warning("Node %d rejected %s.", node.node_id, req)

    def _schedule_uplink(
        self,
        node: NodeState,
        now: float,
        not_before: float = 0.0,
    ) -> None:
        next_time = schedule_next_uplink(
            node,
            self._traffic_rng[node.node_id],
            now,
            traffic=self.scenario.traffic,
            jitter=self.scenario.jitter,
        )
        if next_time < not_before:
            next_time = node.next_tx_time = not_before
        if next_time < self.scenario.duration:
            self._push(SimEvent(next_time, EventKind.TRANSMISSION_START, node.node_id))

    def setup(self) -> None:
        """Deploy nodes, let the scheme configure them and queue first events."""
        scenario = self.scenario
        positions = place_nodes(
            scenario.num_nodes,
            scenario.radius,
            make_rng(scenario.seed, RngStream.PLACEMENT),
        )
        join_times = self._join_times()

        for node_id, position in enumerate(positions):
            mean_rssi = self._mean_rssi(position.distance_to())
            self.nodes[node_id] = NodeState(
                node_id=node_id,
                position=position,
                radio=RadioParams(
                    sf=self._initial_sf(node_id, mean_rssi),
                    tx_power=scenario.tx_power,
                ),
                traffic_period=scenario.period,
                mean_rssi=mean_rssi,
                join_time=join_times.get(node_id, 0.0),
            )
            self._traffic_rng[node_id] = make_rng(
                scenario.seed,
                RngStream.TRAFFIC,
                node_id,
            )
            self._shadowing_rng[node_id] = make_rng(
                scenario.seed,
                RngStream.SHADOWING,
                node_id,
            )

        present = [n for n in self.nodes.values() if n.node_id not in join_times]
        for node_id, req in self.scheme.setup(present, self._scheme_rng).items():
            self._apply(self.nodes[node_id], req)

        for node in present:
            self._schedule_uplink(node, 0.0)
        for node_id, join_time in join_times.items():
            self._push(SimEvent(join_time, EventKind.NODE_JOIN, node_id))
        self._push(SimEvent(scenario.duration, EventKind.SCENARIO_END, -1))

    def _join(self, node: NodeState) -> None:
        req = self.scheme.join(node, self._scheme_rng)
        if req is not None:
            self._apply(node, req)
        logger.debug("Node %d joined at %.3f s.", node.node_id, self.now)
        self._schedule_uplink(node, self.now)

    def _start(self, node: NodeState) -> Transmission:
        while node.pending_commands:
            req = decode_link_adr_req(node.pending_commands.popleft())
            ans = apply_link_adr(node, req, channel_count=len(self.plan))
            node.last_answer = encode_link_adr_ans(ans)

        radio = node.radio
        loss = path_loss(
            self.path_loss,
            max(node.distance, MIN_DISTANCE_M),
            self.path_loss.shadowing(self._shadowing_rng[node.node_id]),
        )
        tx = Transmission(
            node_id=node.node_id,
            fcnt=node.fcnt,
            channel_freq=self.plan.frequency(radio.channel_index),
            sf=int(radio.sf),
            bandwidth=int(radio.bandwidth),
            start_time=self.now,
            airtime=airtime(radio, self.scenario.payload, self.scenario.preamble),
            rssi_at_gw=received_power(
                radio.tx_power,
                self.scenario.antenna_gains,
                loss,
            ),
            channel_index=radio.channel_index,
            preamble_len=self.scenario.preamble,
        )
        node.fcnt += 1
        self.engine.start(tx)
        self._starts += 1
        self._push(SimEvent(tx.end_time, EventKind.TRANSMISSION_END, node.node_id, tx))
        return tx

    def _end(self, node: NodeState, tx: Transmission) -> UplinkRecord | None:
        verdict = self.engine.end(tx)
        self._ends += 1
        self.log.append(
            EventRecord(
                time=tx.start_time,
                node_id=tx.node_id,
                fcnt=tx.fcnt,
                sf=tx.sf,
                channel=tx.channel_index,
                rssi=tx.rssi_at_gw,
                received=verdict is None,
                loss_reason=verdict,
            ),
        )

        uplink = None
        if verdict is None:
            uplink = UplinkRecord(
                node_id=tx.node_id,
                fcnt=tx.fcnt,
                rssi=tx.rssi_at_gw,
                snr=snr_estimate(
                    tx.rssi_at_gw,
                    tx.bandwidth,
                    self.scenario.noise_figure,
                ),
                sf=tx.sf,
                channel_index=tx.channel_index,
                time=tx.end_time,
                bandwidth=tx.bandwidth,
            )
            req = self.scheme.on_uplink(uplink)
            if req is not None:
                node.pending_commands.append(encode_link_adr_req(req))

        not_before = 0.0
        if self.scenario.duty_cycle > 0:
            not_before = tx.start_time + tx.airtime / self.scenario.duty_cycle
        self._schedule_uplink(node, tx.end_time, not_before)
        return uplink

    def run(self) -> EventLog:
        """Process every event and return the log.

        Returns:
            One record per transmission, in end-time order.

        Raises:
            SimulationError: If transmissions were left unmatched.
        """
        scenario = self.scenario
        tags = (scenario.scheme, scenario.num_nodes, scenario.seed)
        with contextlib.ExitStack() as stack:
            stack.enter_context(metrics.run_timer(*tags))
            transmissions = stack.enter_context(metrics.transmission_counter(*tags))
            uplinks = stack.enter_context(metrics.uplink_counter(*tags))
            commands = stack.enter_context(metrics.command_counter(*tags))

            if not self.nodes:
                self.setup()
            while self._queue:
                event = heapq.heappop(self._queue)
                if event.time < self.now:
                    msg = f"Event at {event.time} s popped after {self.now} s."
                    raise SimulationError(msg)
                self.now = event.time
                if event.kind is EventKind.SCENARIO_END:
                    logger.debug("Scenario end at %.3f s.", self.now)
                    continue

                node = self.nodes[event.node_id]
                if event.kind is EventKind.NODE_JOIN:
                    self._join(node)
                elif event.kind is EventKind.TRANSMISSION_START:
                    self._start(node)
                    transmissions.increment()
                else:
                    assert event.transmission is not None  # noqa: S101
                    pending = len(node.pending_commands)
                    if self._end(node, event.transmission) is not None:
                        uplinks.increment()
                    commands.increment(len(node.pending_commands) - pending)

        if not self._starts == self._ends == len(self.log):
            msg = (
                f"{self._starts} starts, {self._ends} ends and "
                f"{len(self.log)} log records do not match."
            )
            raise SimulationError(msg)
        logger.info(
            "Run of %s with %d nodes (seed %d) logged %d transmissions.",
            scenario.scheme,
            scenario.num_nodes,
            scenario.seed,
            len(self.log),
        )
        return self.log


def run(scenario: ScenarioConfig) -> EventLog:
    """Run one scenario from scratch.

    Args:
        scenario: A validated scenario.

    Returns:
        The run's event log.
    """
    return Simulator(scenario).run()

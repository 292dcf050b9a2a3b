"""Network-server state: estimation windows, SF/channel occupancy counters."""

from __future__ import annotations

import collections
import dataclasses
import logging
import typing as t
from fractions import Fraction

from lora_drcc.exceptions import (
    ConfigValidationError,
    EstimationWindowError,
    SchemeError,
    UnknownNodeError,
)
from lora_drcc.radio import SpreadingFactor

if t.TYPE_CHECKING:
    from collections.abc import Iterator

logger = logging.getLogger(__name__)

SPREADING_FACTORS: tuple[int, ...] = tuple(int(sf) for sf in SpreadingFactor)

DEFAULT_MTS = 0.40
DEFAULT_PRI = 0.80
DEFAULT_WINDOW = 10

# Sum over s of s / 2**s for s in 7..12, i.e. 498 / 4096
_ALPHA_NORMALIZER = sum(Fraction(s, 2**s) for s in SPREADING_FACTORS)


@dataclasses.dataclass(frozen=True)
class UplinkRecord:
    """A received, deduplicated uplink as the network server sees it."""

    node_id: int
    fcnt: int
    rssi: float
    snr: float
    sf: int
    channel_index: int
    time: float
    bandwidth: int = 125


@dataclasses.dataclass(frozen=True)
class Thresholds:
    """DER thresholds gating SF changes and the estimation window size."""

    mts: float = DEFAULT_MTS
    pri: float = DEFAULT_PRI
    window: int = DEFAULT_WINDOW

    def __post_init__(self) -> None:
        """Validate threshold ordering.

        Raises:
            ConfigValidationError: If 0 < mts < pri < 1 or window >= 1 fails.
        """
        errors = []
        if not 0 < self.mts < self.pri < 1:
            errors.append(f"Require 0 < mts < pri < 1, got {self.mts}, {self.pri}.")
        if self.window < 1:
            errors.append(f"Estimation window must be >= 1, got {self.window}.")
        if errors:
            raise ConfigValidationError("; ".join(errors), errors=errors)


class EstimationWindow:
    """Ring of the last W received uplinks of one node."""

    def __init__(self, capacity: int = DEFAULT_WINDOW) -> None:
        """Create an empty window.

        Args:
            capacity: Window size W.
        """
        self.capacity = capacity
        self.records: collections.deque[UplinkRecord] = collections.deque(
            maxlen=capacity,
        )

    def __len__(self) -> int:
        """Number of records held."""
        return len(self.records)

    def __iter__(self) -> Iterator[UplinkRecord]:
        """Iterate from oldest to latest record."""
        return iter(self.records)

    @property
    def is_full(self) -> bool:
        """True once W records have been collected."""
        return len(self.records) == self.capacity

    def push(self, record: UplinkRecord) -> bool:
        """Append a record, dropping duplicates and stale frame counters.

        Args:
            record: The received uplink.

        Returns:
            False if the record was a duplicate and was dropped.
        """
        if self.records and record.fcnt <= self.records[-1].fcnt:
            logger.debug(
                "Dropping duplicate uplink of node %d (FCnt %d).",
                record.node_id,
                record.fcnt,
            )
            return False
        self.records.append(record)
        return True

    def clear(self) -> None:
        """Forget every record."""
        self.records.clear()


def short_term_der(window: EstimationWindow) -> float | None:
    """Short-term DER P = R / T over a full window.

    R is the window size and T counts the frames sent between the oldest and
    latest record, both included.

    Args:
        window: The node's estimation window.

    Returns:
        P in (0, 1], or None while the window is not full.

    Raises:
        EstimationWindowError: If frame counters are not strictly increasing.
    """
    if not window.is_full:
        return None
    fcnts = [record.fcnt for record in window]
    if any(b <= a for a, b in zip(fcnts, fcnts[1:])):
        msg = f"Frame counters in window are not increasing: {fcnts}"
        raise EstimationWindowError(msg)
    transmitted = fcnts[-1] - fcnts[0] + 1
    return len(fcnts) / transmitted


def alpha_fraction(s: int) -> Fraction:
    """Exact reference share of nodes on spreading factor `s`.

    Args:
        s: Spreading factor.

    Returns:
        (s / 2**s) normalized over SF7..SF12.

    Raises:
        RadioParameterError: If s is outside 7..12.
    """
    s = int(SpreadingFactor.parse(s))
    return Fraction(s, 2**s) / _ALPHA_NORMALIZER


def alpha(s: int) -> float:
    """Reference share of nodes on spreading factor `s`."""
    return float(alpha_fraction(s))


def sqi(s: int, n: int) -> float:
    """Saturated quantity threshold: the population cap of SF `s` among `n` nodes.

    Args:
        s: Spreading factor.
        n: Total node count.

    Returns:
        alpha(s) * n, not rounded.

    Raises:
        ValueError: If n is negative.
    """
    if n < 0:
        msg = f"Node count must be non-negative, got {n}."
        raise ValueError(msg)
    return alpha(s) * n


@dataclasses.dataclass(frozen=True)
class Assignment:
    """Spreading factor and channel the server has assigned to a node."""

    sf: int
    channel: int


class ServerState:
    """Global scheme state: SFGroup and ChCtrl counters plus per-node records."""

    def __init__(
        self,
        *,
        channel_count: int,
        total_nodes: int,
        thresholds: Thresholds | None = None,
    ) -> None:
        """Create an empty state.

        Args:
            channel_count: Number of uplink channels C.
            total_nodes: Node population N used for SQI.
            thresholds: DER thresholds and window size.

        Raises:
            ConfigValidationError: If there are no channels.
        """
        if channel_count < 1:
            msg = "At least one channel is required."
            raise ConfigValidationError(msg, errors=[msg])
        self.channel_count = channel_count
        self.total_nodes = total_nodes
        self.thresholds = thresholds or Thresholds()
        self.sf_group: dict[int, int] = dict.fromkeys(SPREADING_FACTORS, 0)
        self.ch_ctrl: dict[int, list[int]] = {
            sf: [0] * channel_count for sf in SPREADING_FACTORS
        }
        self.assignment: dict[int, Assignment] = {}
        self.windows: dict[int, EstimationWindow] = {}

    def window(self, node_id: int) -> EstimationWindow:
        """Estimation window of a node, created on first use."""
        if node_id not in self.windows:
            self.windows[node_id] = EstimationWindow(self.thresholds.window)
        return self.windows[node_id]

    def get(self, node_id: int) -> Assignment:
        """Assignment of a known node.

        Args:
            node_id: The node.

        Returns:
            Its current assignment.

        Raises:
            UnknownNodeError: If the server never assigned the node.
        """
        try:
            return self.assignment[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def add(self, node_id: int, sf: int, channel: int) -> None:
        """Add records in SFGroup and ChCtrl for a node.

        Args:
            node_id: The node.
            sf: Its spreading factor.
            channel: Its channel index.

        Raises:
            SchemeError: If the node already has records or the channel is unknown.
        """
        if node_id in self.assignment:
            msg = f"Node {node_id} already holds an assignment."
            raise SchemeError(msg)
        if not 0 <= channel < self.channel_count:
            msg = f"Channel {channel} outside 0..{self.channel_count - 1}."
            raise SchemeError(msg)
        sf = int(sf)
        self.assignment[node_id] = Assignment(sf, channel)
        self.sf_group[sf] += 1
        self.ch_ctrl[sf][channel] += 1

    def remove(self, node_id: int) -> Assignment:
        """Delete the records of a node.

        Args:
            node_id: The node.

        Returns:
            The removed assignment.
        """
        old = self.get(node_id)
        del self.assignment[node_id]
        self.sf_group[old.sf] -= 1
        self.ch_ctrl[old.sf][old.channel] -= 1
        return old

    def clear(self) -> None:
        """Drop every assignment and zero the counters."""
        self.assignment.clear()
        for sf in SPREADING_FACTORS:
            self.sf_group[sf] = 0
            self.ch_ctrl[sf] = [0] * self.channel_count

    def recount(self) -> tuple[dict[int, int], dict[int, list[int]]]:
        """Recompute SFGroup and ChCtrl from the assignment map alone.

        Returns:
            Freshly counted (sf_group, ch_ctrl).
        """
        sf_group = dict.fromkeys(SPREADING_FACTORS, 0)
        ch_ctrl = {sf: [0] * self.channel_count for sf in SPREADING_FACTORS}
        for assigned in self.assignment.values():
            sf_group[assigned.sf] += 1
            ch_ctrl[assigned.sf][assigned.channel] += 1
        return sf_group, ch_ctrl

    def is_consistent(self) -> bool:
        """Whether incremental counters match a recount from scratch."""
        return self.recount() == (self.sf_group, self.ch_ctrl)

    def sqi(self, sf: int) -> float:
        """SQI of a spreading factor for this server's population."""
        return sqi(sf, self.total_nodes)

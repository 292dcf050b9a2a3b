"""DRCC: short-term-DER driven SF control with per-SF channel load balancing.

Usage example:
--------------
.. code-block:: python

    state = ServerState(channel_count=8, total_nodes=1000)
    initialize_channels(state, {0: 7, 1: 7, 2: 9})
    new_sf = drcc_data_rate_step(state, 2, p=0.3, latest_rssi=-120.0)
    if new_sf is not None:
        channel = rebalance_on_change(state, 2, 9, new_sf)
"""

from __future__ import annotations

import typing as t

import numpy as np

from lora_drcc.exceptions import SchemeError
from lora_drcc.radio import Bandwidth, sensitivity
from lora_drcc.schemes._state import (
    SPREADING_FACTORS,
    Assignment,
    ServerState,
    short_term_der,
)
from lora_drcc.schemes.core import Scheme, link_adr_command

if t.TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from lora_drcc.mac import LinkADRReq
    from lora_drcc.schemes._state import UplinkRecord
    from lora_drcc.schemes.core import SchemeOptions
    from lora_drcc.simulation import NodeState

_MIN_SF = SPREADING_FACTORS[0]
_MAX_SF = SPREADING_FACTORS[-1]


def drcc_data_rate_step(
    state: ServerState,
    node_id: int,
    p: float,
    latest_rssi: float,
    bandwidth: int = Bandwidth.BW125,
) -> int | None:
    """Decide whether a node should move one spreading factor up or down.

    Args:
        state: Server state holding the node's assignment.
        node_id: The node.
        p: Short-term DER over a full window.
        latest_rssi: RSSI of the uplink that triggered the evaluation, dBm.
        bandwidth: Bandwidth of the node, kHz.

    Returns:
        The new spreading factor, or None to keep the current one. The node's
        estimation window is cleared whenever an SF is returned.

    Raises:
        UnknownNodeError: If the server holds no assignment for the node.
    """
    sf = state.get(node_id).sf
    thresholds = state.thresholds
    new_sf: int | None = None

    if p < thresholds.mts:
        if sf < _MAX_SF and state.sf_group[sf + 1] < state.sqi(sf + 1):
            new_sf = sf + 1
    elif (
        p > thresholds.pri
        and sf > _MIN_SF
        and state.sf_group[sf - 1] < state.sqi(sf - 1)
        and latest_rssi > sensitivity(sf - 1, bandwidth)
    ):
        new_sf = sf - 1

    if new_sf is not None:
        state.window(node_id).clear()
    return new_sf


def initialize_channels(
    state: ServerState,
    nodes: Mapping[int, int],
) -> dict[int, Assignment]:
    """Spread each SF group evenly over the channels.

    Nodes of one SF are taken in id order and cut into contiguous blocks, one
    per channel, whose sizes differ by at most one. Previous assignments are
    discarded.

    Args:
        state: Server state to rebuild.
        nodes: Spreading factor of every node, keyed by node id.

    Returns:
        The resulting assignment map.
    """
    state.clear()
    groups: dict[int, list[int]] = {sf: [] for sf in SPREADING_FACTORS}
    for node_id in sorted(nodes):
        groups[int(nodes[node_id])].append(node_id)

    for sf, members in groups.items():
        if not members:
            continue
        blocks = np.array_split(np.asarray(members), state.channel_count)
        for channel, block in enumerate(blocks):
            for node_id in block:
                state.add(int(node_id), sf, channel)

    return dict(state.assignment)


def rebalance_on_change(
    state: ServerState,
    node_id: int,
    sf_before: int | None,
    sf_after: int,
) -> int:
    """Move a node into the least loaded channel of its new SF.

    Args:
        state: Server state.
        node_id: The node.
        sf_before: Its previous spreading factor, None for a newly joined node.
        sf_after: Its new spreading factor.

    Returns:
        The chosen channel; ties go to the lowest channel index.

    Raises:
        SchemeError: If the SF did not change, `sf_before` disagrees with the
            server's record, or a joining node is already known.
    """
    if sf_before is None:
        if node_id in state.assignment:
            msg = f"Node {node_id} joined twice."
            raise SchemeError(msg)
    else:
        if sf_before == sf_after:
            msg = f"Node {node_id} rebalanced without an SF change (SF{sf_after})."
            raise SchemeError(msg)
        if state.get(node_id).sf != sf_before:
            msg = f"Node {node_id} is not on SF{sf_before}."
            raise SchemeError(msg)
        state.remove(node_id)

    channel = int(np.argmin(state.ch_ctrl[sf_after]))
    state.add(node_id, sf_after, channel)
    return channel


class DrccScheme(Scheme, scheme_name="drcc"):
    """Short-term DER thresholds with SQI caps and channel balancing."""

    adaptive = True

    def __init__(self, options: SchemeOptions) -> None:
        """Create the scheme with an empty server state.

        Args:
            options: Run-wide scheme settings.
        """
        super().__init__(options)
        self.state = ServerState(
            channel_count=options.channel_count,
            total_nodes=options.total_nodes,
            thresholds=options.thresholds,
        )

    def setup(
        self,
        nodes: Sequence[NodeState],
        rng: np.random.Generator,  # noqa: ARG002
    ) -> dict[int, LinkADRReq]:
        """Balance the channels of every SF group.

        Args:
            nodes: Nodes connected at time zero.
            rng: Unused; channel initialization is deterministic.

        Returns:
            One command per node.
        """
        assignment = initialize_channels(
            self.state,
            {node.node_id: int(node.radio.sf) for node in nodes},
        )
        return {
            node_id: link_adr_command(assigned.sf, assigned.channel)
            for node_id, assigned in assignment.items()
        }

    def on_uplink(self, record: UplinkRecord) -> LinkADRReq | None:
        """Update the node's window and run one SF and channel decision.

        Args:
            record: The received uplink.

        Returns:
            A command when the node's SF changes.
        """
        if not self.state.window(record.node_id).push(record):
            return None
        p = short_term_der(self.state.window(record.node_id))
        if p is None:
            return None

        sf_before = self.state.get(record.node_id).sf
        sf_after = drcc_data_rate_step(
            self.state,
            record.node_id,
            p,
            record.rssi,
            record.bandwidth,
        )
        if sf_after is None:
            return None

        channel = rebalance_on_change(self.state, record.node_id, sf_before, sf_after)
        self.logger.debug(
            "Node %d: P=%.2f, SF%d -> SF%d on channel %d",
            record.node_id,
            p,
            sf_before,
            sf_after,
            channel,
        )
        return link_adr_command(sf_after, channel, record.bandwidth)

    def join(
        self,
        node: NodeState,
        rng: np.random.Generator,  # noqa: ARG002
    ) -> LinkADRReq:
        """Place a new node in the least loaded channel of its SF.

        Args:
            node: The joining node.
            rng: Unused.

        Returns:
            The channel assignment command.
        """
        sf = int(node.radio.sf)
        channel = rebalance_on_change(self.state, node.node_id, None, sf)
        return link_adr_command(sf, channel, node.radio.bandwidth)

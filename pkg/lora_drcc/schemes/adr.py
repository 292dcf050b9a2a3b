"""Basic server-side ADR: step the data rate up from the best SNR of recent uplinks."""

from __future__ import annotations

import collections
import math
import typing as t

from lora_drcc.radio import RadioParams
from lora_drcc.schemes.core import (
    DEFAULT_ADR_HISTORY,
    DEFAULT_ADR_MARGIN_DB,
    Scheme,
    link_adr_command,
    random_channel,
)

if t.TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy as np

    from lora_drcc.mac import LinkADRReq
    from lora_drcc.schemes._state import UplinkRecord
    from lora_drcc.schemes.core import SchemeOptions
    from lora_drcc.simulation import NodeState

# Demodulation floor per spreading factor, dB
REQUIRED_SNR_DB: dict[int, float] = {
    7: -7.5,
    8: -10.0,
    9: -12.5,
    10: -15.0,
    11: -17.5,
    12: -20.0,
}
STEP_DB = 3.0


def basic_adr_step(
    history: Sequence[UplinkRecord],
    current: RadioParams,
    *,
    history_size: int = DEFAULT_ADR_HISTORY,
    device_margin: float = DEFAULT_ADR_MARGIN_DB,
) -> int | None:
    """Spreading factor the basic ADR algorithm would move a node to.

    Args:
        history: The node's most recent received uplinks.
        current: The node's radio parameters.
        history_size: Uplinks required before deciding.
        device_margin: Installation margin, dB.

    Returns:
        A lower spreading factor, or None to leave the node alone.
    """
    if len(history) < history_size:
        return None
    recent = list(history)[-history_size:]
    sf = int(current.sf)
    margin = max(r.snr for r in recent) - REQUIRED_SNR_DB[sf] - device_margin
    steps = math.floor(margin / STEP_DB)
    if steps <= 0 or sf == min(REQUIRED_SNR_DB):
        return None
    return sf - min(steps, sf - min(REQUIRED_SNR_DB))


class AdrScheme(Scheme, scheme_name="adr"):
    """Basic ADR over a random channel per node."""

    adaptive = True

    def __init__(self, options: SchemeOptions) -> None:
        """Create the scheme.

        Args:
            options: Run-wide scheme settings.
        """
        super().__init__(options)
        self.history: dict[int, collections.deque[UplinkRecord]] = {}
        self.radio: dict[int, RadioParams] = {}

    def _register(self, node: NodeState, rng: np.random.Generator) -> LinkADRReq:
        channel = random_channel(rng, self.options.channel_count)
        self.radio[node.node_id] = node.radio.replace(channel_index=channel)
        self.history[node.node_id] = collections.deque(
            maxlen=self.options.adr_history,
        )
        return link_adr_command(node.radio.sf, channel, node.radio.bandwidth)

    def setup(
        self,
        nodes: Sequence[NodeState],
        rng: np.random.Generator,
    ) -> dict[int, LinkADRReq]:
        """Keep each node's SF and draw its channel.

        Args:
            nodes: Nodes connected at time zero.
            rng: The scheme's random stream.

        Returns:
            One command per node.
        """
        return {node.node_id: self._register(node, rng) for node in nodes}

    def join(self, node: NodeState, rng: np.random.Generator) -> LinkADRReq:
        """Register a late node like one present at start.

        Args:
            node: The joining node.
            rng: The scheme's random stream.

        Returns:
            The channel command.
        """
        return self._register(node, rng)

    def on_uplink(self, record: UplinkRecord) -> LinkADRReq | None:
        """Record the uplink and step the data rate once the history is full.

        Args:
            record: The received uplink.

        Returns:
            A command when the SF decreases.
        """
        history = self.history[record.node_id]
        if history and record.fcnt <= history[-1].fcnt:
            return None
        history.append(record)

        current = self.radio[record.node_id]
        new_sf = basic_adr_step(
            history,
            current,
            history_size=self.options.adr_history,
            device_margin=self.options.adr_margin,
        )
        if new_sf is None:
            return None

        history.clear()
        self.radio[record.node_id] = current.replace(sf=new_sf)
        self.logger.debug("Node %d: SF%d -> SF%d", record.node_id, current.sf, new_sf)
        return link_adr_command(new_sf, current.channel_index, current.bandwidth)

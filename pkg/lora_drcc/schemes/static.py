"""Static data rate: every node keeps one spreading factor for the whole run."""

from __future__ import annotations

import typing as t

from lora_drcc.radio import SpreadingFactor
from lora_drcc.schemes.core import Scheme, link_adr_command, random_channel

if t.TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy as np

    from lora_drcc.mac import LinkADRReq
    from lora_drcc.schemes.core import SchemeOptions
    from lora_drcc.simulation import NodeState


class StaticScheme(Scheme, scheme_name="static"):
    """Fixed SF, random channel, no commands after setup."""

    def __init__(self, options: SchemeOptions, *, sf: int) -> None:
        """Create the scheme.

        Args:
            options: Run-wide scheme settings.
            sf: The spreading factor every node uses.
        """
        super().__init__(options)
        self.sf = int(SpreadingFactor.parse(sf))

    def _assign(self, node: NodeState, rng: np.random.Generator) -> LinkADRReq:
        channel = random_channel(rng, self.options.channel_count)
        return link_adr_command(self.sf, channel, node.radio.bandwidth)

    def setup(
        self,
        nodes: Sequence[NodeState],
        rng: np.random.Generator,
    ) -> dict[int, LinkADRReq]:
        """Move every node to the fixed SF on a random channel.

        Args:
            nodes: Nodes connected at time zero.
            rng: The scheme's random stream.

        Returns:
            One command per node.
        """
        return {node.node_id: self._assign(node, rng) for node in nodes}

    def join(self, node: NodeState, rng: np.random.Generator) -> LinkADRReq:
        """Configure a late node like the others.

        Args:
            node: The joining node.
            rng: The scheme's random stream.

        Returns:
            The configuration command.
        """
        return self._assign(node, rng)

"""Fair SF allocation: split the population over SFs in reference proportions."""

from __future__ import annotations

import math
import typing as t

from lora_drcc.channel import lowest_feasible_sf
from lora_drcc.radio import Bandwidth, sensitivity
from lora_drcc.schemes._state import SPREADING_FACTORS, alpha_fraction
from lora_drcc.schemes.core import Scheme, link_adr_command, random_channel

if t.TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    import numpy as np

    from lora_drcc.mac import LinkADRReq
    from lora_drcc.simulation import NodeState


def sf_quotas(n: int) -> dict[int, int]:
    """Number of nodes per SF out of `n`, proportional to alpha.

    Whole parts of alpha(s) * n are handed out first; the seats left over go
    to the largest fractional parts, lower SFs first on ties.

    Args:
        n: Population size.

    Returns:
        Node count per spreading factor, summing to `n`.
    """
    shares = {sf: alpha_fraction(sf) * n for sf in SPREADING_FACTORS}
    quotas = {sf: math.floor(share) for sf, share in shares.items()}
    leftover = n - sum(quotas.values())
    by_remainder = sorted(
        SPREADING_FACTORS,
        key=lambda sf: (-(shares[sf] - quotas[sf]), sf),
    )
    for sf in by_remainder[:leftover]:
        quotas[sf] += 1
    return quotas


def fair_sf_allocation(
    rssi_by_node: Mapping[int, float],
    n: int | None = None,
    bandwidth: int = Bandwidth.BW125,
) -> dict[int, int]:
    """Allocate SFs by RSSI rank, strongest nodes on the fastest SF.

    Args:
        rssi_by_node: Representative RSSI of each node, dBm.
        n: Population size the quotas are computed for; defaults to the
            number of nodes given. Nodes ranked beyond the quotas get SF12.
        bandwidth: Bandwidth in kHz.

    Returns:
        Spreading factor per node id. A node whose quota SF cannot close its
        link is bumped to its lowest feasible SF.
    """
    if n is None:
        n = len(rssi_by_node)
    ranked = sorted(rssi_by_node, key=lambda node_id: (-rssi_by_node[node_id], node_id))

    slots = [sf for sf, count in sf_quotas(n).items() for _ in range(count)]
    allocation: dict[int, int] = {}
    for rank, node_id in enumerate(ranked):
        sf = slots[rank] if rank < len(slots) else SPREADING_FACTORS[-1]
        rssi = rssi_by_node[node_id]
        if not rssi > sensitivity(sf, bandwidth):
            sf = max(sf, lowest_feasible_sf(rssi, bandwidth))
        allocation[node_id] = sf
    return allocation


class FairScheme(Scheme, scheme_name="fadr"):
    """One-shot proportional SF allocation on a random channel per node."""

    def setup(
        self,
        nodes: Sequence[NodeState],
        rng: np.random.Generator,
    ) -> dict[int, LinkADRReq]:
        """Allocate SFs over the whole population by mean RSSI.

        Args:
            nodes: Nodes connected at time zero.
            rng: The scheme's random stream.

        Returns:
            One command per node.
        """
        allocation = fair_sf_allocation(
            {node.node_id: node.mean_rssi for node in nodes},
            n=len(nodes),
        )
        return {
            node.node_id: link_adr_command(
                allocation[node.node_id],
                random_channel(rng, self.options.channel_count),
                node.radio.bandwidth,
            )
            for node in nodes
        }

    def join(self, node: NodeState, rng: np.random.Generator) -> LinkADRReq:
        """Give a late node its lowest feasible SF.

        Args:
            node: The joining node.
            rng: The scheme's random stream.

        Returns:
            The configuration command.
        """
        sf = lowest_feasible_sf(node.mean_rssi, node.radio.bandwidth)
        return link_adr_command(
            sf,
            random_channel(rng, self.options.channel_count),
            node.radio.bandwidth,
        )

"""DER and load metrics computed from an event log."""

from __future__ import annotations

import collections
import dataclasses
import typing as t

from lora_drcc.collision import LossReason
from lora_drcc.exceptions import EmptyEventLogError

if t.TYPE_CHECKING:
    from collections.abc import Iterable

    from lora_drcc.simulation import EventRecord


@dataclasses.dataclass(frozen=True)
class MetricsReport:
    """Delivery and configuration summary of one run."""

    transmitted: int
    received: int
    global_der: float
    per_node_der: dict[int, float]
    per_node_transmitted: dict[int, int]
    sf_histogram: dict[int, int]
    channel_load: dict[tuple[int, int], int]
    collisions: int
    under_sensitivity_losses: int
    capacity_losses: int

    @property
    def lost(self) -> int:
        """Transmissions the gateway did not receive."""
        return self.transmitted - self.received

    @property
    def reconciles(self) -> bool:
        """Whether every loss is accounted for by exactly one reason."""
        return self.transmitted == (
            self.received
            + self.collisions
            + self.under_sensitivity_losses
            + self.capacity_losses
        )

    def to_dict(self) -> dict[str, t.Any]:
        """JSON-friendly rendering; tuple keys become ``"SF:channel"`` strings."""
        return {
            "transmitted": self.transmitted,
            "received": self.received,
            "global_der": self.global_der,
            "collisions": self.collisions,
            "under_sensitivity_losses": self.under_sensitivity_losses,
            "capacity_losses": self.capacity_losses,
            "sf_histogram": {str(sf): n for sf, n in self.sf_histogram.items()},
            "channel_load": {
                f"{sf}:{channel}": n for (sf, channel), n in self.channel_load.items()
            },
        }


def compute_metrics(log: Iterable[EventRecord], since: float = 0.0) -> MetricsReport:
    """Count deliveries and losses in a log.

    The SF histogram and channel load describe the configuration each node
    used for its last logged transmission.

    Args:
        log: Transmission records of a run.
        since: Ignore transmissions started before this time (warm-up).

    Returns:
        The report.

    Raises:
        EmptyEventLogError: If no record remains to measure.
    """
    records = [r for r in log if r.time >= since]
    if not records:
        msg = f"No transmissions logged at or after {since} s."
        raise EmptyEventLogError(msg)

    sent: collections.Counter[int] = collections.Counter()
    delivered: collections.Counter[int] = collections.Counter()
    reasons: collections.Counter[LossReason | None] = collections.Counter()
    last: dict[int, EventRecord] = {}
    for record in records:
        sent[record.node_id] += 1
        delivered[record.node_id] += record.received
        reasons[record.loss_reason] += 1
        if record.node_id not in last or record.fcnt > last[record.node_id].fcnt:
            last[record.node_id] = record

    received = sum(delivered.values())
    sf_counts = collections.Counter(r.sf for r in last.values())
    load = collections.Counter((r.sf, r.channel) for r in last.values())
    return MetricsReport(
        transmitted=len(records),
        received=received,
        global_der=received / len(records),
        per_node_der={node: delivered[node] / n for node, n in sorted(sent.items())},
        per_node_transmitted=dict(sorted(sent.items())),
        sf_histogram=dict(sorted(sf_counts.items())),
        channel_load=dict(sorted(load.items())),
        collisions=reasons[LossReason.COLLISION],
        under_sensitivity_losses=reasons[LossReason.UNDER_SENSITIVITY],
        capacity_losses=reasons[LossReason.CAPACITY],
    )

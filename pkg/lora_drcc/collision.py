"""Gateway reception: frequency/SF clashes, capture effect, preamble timing, capacity.

Every transmission is judged once, at its end, against every transmission that
was on air at some point during its lifetime. A verdict therefore depends only
on the set of overlapping transmissions and never on processing order.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import typing as t

from lora_drcc.radio import DEFAULT_PREAMBLE_LEN, sensitivity, symbol_time

if t.TYPE_CHECKING:
    from collections.abc import Iterable

logger = logging.getLogger(__name__)

DEFAULT_CAPTURE_THRESHOLD_DB = 6.0
DEFAULT_DEMOD_CAPACITY = 8
# Preamble symbols a receiver may lose to an interferer and still lock
LOCK_SYMBOLS = 5

# |f1 - f2| below which two channels interfere, keyed by the narrower bandwidth
_FREQUENCY_THRESHOLD_KHZ = {500: 120.0, 250: 60.0, 125: 30.0}


class CaptureOutcome(str, enum.Enum):
    """Result of comparing two same-SF colliding signals."""

    A_SURVIVES = "a_survives"
    B_SURVIVES = "b_survives"
    BOTH_LOST = "both_lost"


class LossReason(str, enum.Enum):
    """Why a transmission was not received."""

    COLLISION = "collision"
    UNDER_SENSITIVITY = "under_sensitivity"
    CAPACITY = "capacity"


@dataclasses.dataclass(eq=False)
class Transmission:
    """One uplink on air, as seen by the gateway."""

    node_id: int
    fcnt: int
    channel_freq: float
    sf: int
    bandwidth: int
    start_time: float
    airtime: float
    rssi_at_gw: float
    channel_index: int = 0
    preamble_len: int = DEFAULT_PREAMBLE_LEN
    lost: bool = False
    loss_reason: LossReason | None = None
    interferers: list[Transmission] = dataclasses.field(
        default_factory=list,
        repr=False,
    )
    demodulating: bool = dataclasses.field(default=False, repr=False)

    def __post_init__(self) -> None:
        """Check the airtime.

        Raises:
            ValueError: If the airtime is not positive.
        """
        if not self.airtime > 0:
            msg = f"Transmission airtime must be positive, got {self.airtime}."
            raise ValueError(msg)

    @property
    def end_time(self) -> float:
        """Time the last symbol leaves the air."""
        return self.start_time + self.airtime

    @property
    def critical_start(self) -> float:
        """Start of the section an interferer must not overlap."""
        t_sym = symbol_time(self.sf, self.bandwidth)
        return self.start_time + (self.preamble_len + 4.25 - LOCK_SYMBOLS) * t_sym

    def mark_lost(self, reason: LossReason) -> None:
        """Record a loss, keeping the first reason assigned.

        Args:
            reason: Why the transmission was lost.
        """
        if not self.lost:
            self.lost = True
            self.loss_reason = reason


def frequency_clash(f1: float, bw1: int, f2: float, bw2: int) -> bool:
    """Whether two center frequencies are close enough to interfere.

    Args:
        f1: First center frequency in MHz.
        bw1: First bandwidth in kHz.
        f2: Second center frequency in MHz.
        bw2: Second bandwidth in kHz.

    Returns:
        True if the spacing is within the threshold of the narrower bandwidth.
    """
    spacing_khz = round(abs(f1 - f2) * 1000.0, 6)
    return spacing_khz <= _FREQUENCY_THRESHOLD_KHZ[min(int(bw1), int(bw2))]


def sf_clash(sf1: int, sf2: int) -> bool:
    """Whether two spreading factors interfere; distinct SFs are orthogonal."""
    return int(sf1) == int(sf2)


def timing_critical_overlap(
    a: Transmission,
    b: Transmission,
    preamble_len: int | None = None,
) -> bool:
    """Whether `b` is on air during the critical section of `a`.

    The critical section runs from the point where only the last five preamble
    symbols of `a` remain to the end of `a`.

    Args:
        a: The transmission being judged.
        b: The potential interferer.
        preamble_len: Preamble length of `a`; defaults to the one it carries.

    Returns:
        True if `b` corrupts `a`'s reception window.
    """
    if preamble_len is None:
        critical_start = a.critical_start
    else:
        t_sym = symbol_time(a.sf, a.bandwidth)
        critical_start = a.start_time + (preamble_len + 4.25 - LOCK_SYMBOLS) * t_sym
    return b.end_time > critical_start and b.start_time < a.end_time


def capture_verdict(
    rssi_a: float,
    rssi_b: float,
    threshold: float = DEFAULT_CAPTURE_THRESHOLD_DB,
) -> CaptureOutcome:
    """Power-domain outcome of a same-SF, same-channel collision.

    Args:
        rssi_a: Received power of `a` in dBm.
        rssi_b: Received power of `b` in dBm.
        threshold: Minimum power advantage for capture, dB.

    Returns:
        Which signal, if any, survives.
    """
    if rssi_a - rssi_b >= threshold:
        return CaptureOutcome.A_SURVIVES
    if rssi_b - rssi_a >= threshold:
        return CaptureOutcome.B_SURVIVES
    return CaptureOutcome.BOTH_LOST


def corrupted_by(
    completed: Transmission,
    other: Transmission,
    capture_threshold: float = DEFAULT_CAPTURE_THRESHOLD_DB,
) -> bool:
    """Pairwise rule: does `other` destroy `completed`?

    Args:
        completed: The transmission being judged.
        other: A transmission overlapping it in time.
        capture_threshold: Capture threshold in dB.

    Returns:
        True if `completed` cannot be demodulated because of `other`.
    """
    if other is completed:
        return False
    return (
        frequency_clash(
            completed.channel_freq,
            completed.bandwidth,
            other.channel_freq,
            other.bandwidth,
        )
        and sf_clash(completed.sf, other.sf)
        and timing_critical_overlap(completed, other)
        and capture_verdict(completed.rssi_at_gw, other.rssi_at_gw, capture_threshold)
        is not CaptureOutcome.A_SURVIVES
    )


def resolve(
    completed: Transmission,
    concurrent: Iterable[Transmission],
    capture_threshold: float = DEFAULT_CAPTURE_THRESHOLD_DB,
) -> LossReason | None:
    """Final verdict on a transmission at its end time.

    Sensitivity and capacity losses are decided on arrival by
    :class:`CollisionEngine`; this adds collision losses on top.

    Args:
        completed: The transmission that just ended.
        concurrent: Every transmission whose interval intersects it.
        capture_threshold: Capture threshold in dB.

    Returns:
        The loss reason, or None if the gateway received it.
    """
    if not completed.lost and any(
        corrupted_by(completed, other, capture_threshold) for other in concurrent
    ):
        completed.mark_lost(LossReason.COLLISION)
    return completed.loss_reason


class CollisionEngine:
    """Tracks transmissions on air at the gateway and assigns verdicts."""

    def __init__(
        self,
        *,
        demod_capacity: int | None = DEFAULT_DEMOD_CAPACITY,
        capture_threshold: float = DEFAULT_CAPTURE_THRESHOLD_DB,
    ) -> None:
        """Create an engine.

        Args:
            demod_capacity: Concurrent demodulation paths; None for unlimited.
            capture_threshold: Capture threshold in dB.
        """
        self.demod_capacity = demod_capacity
        self.capture_threshold = capture_threshold
        self.on_air: list[Transmission] = []

    def start(self, tx: Transmission) -> None:
        """Register a transmission whose first symbol just reached the gateway.

        Args:
            tx: The arriving transmission.
        """
        for other in self.on_air:
            other.interferers.append(tx)
            tx.interferers.append(other)

        if tx.rssi_at_gw < sensitivity(tx.sf, tx.bandwidth):
            tx.mark_lost(LossReason.UNDER_SENSITIVITY)
        elif (
            self.demod_capacity is not None
            and sum(o.demodulating for o in self.on_air) >= self.demod_capacity
        ):
            tx.mark_lost(LossReason.CAPACITY)
        else:
            tx.demodulating = True

        self.on_air.append(tx)

    def end(self, tx: Transmission) -> LossReason | None:
        """Judge a transmission whose last symbol just reached the gateway.

        Args:
            tx: The finished transmission.

        Returns:
            The loss reason, or None if received.
        """
        self.on_air.remove(tx)
        verdict = resolve(tx, tx.interferers, self.capture_threshold)
        # Drop references so finished transmissions can be collected
        tx.interferers = []
        tx.demodulating = False
        logger.debug(
            "Node %d FCnt %d SF%d ch %.1f MHz: %s",
            tx.node_id,
            tx.fcnt,
            tx.sf,
            tx.channel_freq,
            verdict.value if verdict else "received",
        )
        return verdict

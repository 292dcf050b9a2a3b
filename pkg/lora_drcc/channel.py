"""Log-distance path loss, link budget, SNR synthesis and analytic range."""

from __future__ import annotations

import dataclasses
import logging
import math
import typing as t

from lora_drcc.exceptions import ChannelModelError
from lora_drcc.radio import Bandwidth, SpreadingFactor, sensitivity

if t.TYPE_CHECKING:
    import numpy as np

logger = logging.getLogger(__name__)

THERMAL_NOISE_DBM_HZ = -174.0
DEFAULT_NOISE_FIGURE_DB = 6.0


@dataclasses.dataclass(frozen=True)
class PathLossParams:
    """Parameters of the log-distance path loss model with log-normal shadowing."""

    d0: float = 40.0
    lpl0: float = 127.41
    gamma: float = 2.08
    sigma: float = 0.0

    def __post_init__(self) -> None:
        """Validate the parameters.

        Raises:
            ChannelModelError: If d0 is not positive or sigma is negative.
        """
        if not self.d0 > 0:
            msg = f"Reference distance d0 must be positive, got {self.d0}."
            raise ChannelModelError(msg)
        if self.sigma < 0:
            msg = f"Shadowing sigma must be non-negative, got {self.sigma}."
            raise ChannelModelError(msg)

    def shadowing(self, rng: np.random.Generator) -> float:
        """Draw one shadowing term X ~ N(0, sigma^2).

        The generator is left untouched when sigma is zero.

        Args:
            rng: Random stream to draw from.

        Returns:
            Shadowing in dB.
        """
        if self.sigma == 0:
            return 0.0
        return float(rng.normal(0.0, self.sigma))


@dataclasses.dataclass(frozen=True)
class Position:
    """A point on the deployment plane, meters; the gateway sits at the origin."""

    x: float
    y: float

    def __post_init__(self) -> None:
        """Reject non-finite coordinates.

        Raises:
            ChannelModelError: If a coordinate is NaN or infinite.
        """
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            msg = f"Position coordinates must be finite, got ({self.x}, {self.y})."
            raise ChannelModelError(msg)

    def distance_to(self, other: Position | None = None) -> float:
        """Euclidean distance to another point (the origin by default).

        Args:
            other: The other position.

        Returns:
            Distance in meters.
        """
        if other is None:
            return math.hypot(self.x, self.y)
        return math.hypot(self.x - other.x, self.y - other.y)


class LinkRange(t.NamedTuple):
    """Result of the analytic range inversion."""

    distance: float
    below_reference: bool


def path_loss(
    params: PathLossParams,
    distance: float,
    shadowing_draw: float = 0.0,
) -> float:
    """Path loss at a distance.

    Args:
        params: Model parameters.
        distance: Node-gateway distance in meters.
        shadowing_draw: Shadowing term sampled by the caller.

    Returns:
        Path loss in dB.

    Raises:
        ChannelModelError: If the distance is not positive.
    """
    if not distance > 0:
        msg = f"Distance must be positive, got {distance}."
        raise ChannelModelError(msg)
    return (
        params.lpl0
        + 10.0 * params.gamma * math.log10(distance / params.d0)
        + shadowing_draw
    )


def received_power(tx_power: float, antenna_gains: float, loss: float) -> float:
    """Link budget: RSSI = TX power + antenna gains - loss."""
    return tx_power + antenna_gains - loss


def noise_floor(
    bandwidth: int,
    noise_figure: float = DEFAULT_NOISE_FIGURE_DB,
) -> float:
    """Receiver noise floor in dBm for a bandwidth in kHz."""
    hertz = Bandwidth.parse(bandwidth).hertz
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(hertz) + noise_figure


def snr_estimate(
    rssi: float,
    bandwidth: int,
    noise_figure: float = DEFAULT_NOISE_FIGURE_DB,
) -> float:
    """Synthesize the SNR a gateway would report for an RSSI.

    Args:
        rssi: Received power in dBm.
        bandwidth: Bandwidth in kHz.
        noise_figure: Receiver noise figure in dB.

    Returns:
        SNR in dB.
    """
    return rssi - noise_floor(bandwidth, noise_figure)


def max_range(
    sf: int,
    bandwidth: int,
    tx_power: float,
    params: PathLossParams,
    antenna_gains: float = 0.0,
) -> LinkRange:
    """Distance at which the mean received power equals receiver sensitivity.

    Shadowing is ignored: with sigma > 0 this is the median range.

    Args:
        sf: Spreading factor.
        bandwidth: Bandwidth in kHz.
        tx_power: TX power in dBm.
        params: Path loss parameters.
        antenna_gains: Sum of antenna gains in dB.

    Returns:
        The range and a flag set when the budget is already negative at d0.
    """
    margin = tx_power + antenna_gains - sensitivity(sf, bandwidth) - params.lpl0
    if params.gamma == 0:
        distance = math.inf if margin >= 0 else 0.0
    else:
        distance = params.d0 * 10 ** (margin / (10.0 * params.gamma))
    below_reference = margin < 0
    if below_reference:
        logger.warning(
            "Link budget for SF%d/%d kHz is negative at d0 (%.2f dB short).",
            sf,
            bandwidth,
            -margin,
        )
    return LinkRange(distance, below_reference)


def lowest_feasible_sf(rssi: float, bandwidth: int = Bandwidth.BW125) -> int:
    """Smallest spreading factor whose sensitivity lies strictly below `rssi`.

    Args:
        rssi: Mean received power in dBm.
        bandwidth: Bandwidth in kHz.

    Returns:
        A spreading factor; SF12 when no SF closes the link.
    """
    for sf in SpreadingFactor:
        if rssi > sensitivity(sf, bandwidth):
            return int(sf)
    return int(SpreadingFactor.SF12)

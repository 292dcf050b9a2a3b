"""LoRa PHY parameter types, time-on-air, receiver sensitivity and EU868 data rates.

Usage example:
--------------
.. code-block:: python

    params = RadioParams(sf=SpreadingFactor.SF7)
    airtime(params, payload_len=20)  # 0.056576 seconds
    sensitivity(SpreadingFactor.SF9, Bandwidth.BW125)  # -129.0 dBm
"""

from __future__ import annotations

import dataclasses
import enum
import typing as t

from lora_drcc.exceptions import RadioParameterError, UnsupportedDataRateError

__all__ = [
    "DEFAULT_PREAMBLE_LEN",
    "EU868_FREQUENCIES",
    "MAX_EIRP_DBM",
    "Bandwidth",
    "ChannelPlan",
    "CodingRate",
    "DataRate",
    "RadioParams",
    "SpreadingFactor",
    "airtime",
    "dr_to_radio",
    "radio_to_dr",
    "sensitivity",
    "symbol_time",
]

MAX_EIRP_DBM = 16.0
DEFAULT_TX_POWER_DBM = 14.0
DEFAULT_PREAMBLE_LEN = 8
MAX_CHANNELS = 16

EU868_FREQUENCIES: tuple[float, ...] = (
    868.1,
    868.3,
    868.5,
    868.7,
    868.9,
    869.1,
    869.3,
    869.5,
)


class SpreadingFactor(enum.IntEnum):
    """LoRa spreading factors usable in EU868."""

    SF7 = 7
    SF8 = 8
    SF9 = 9
    SF10 = 10
    SF11 = 11
    SF12 = 12

    @classmethod
    def parse(cls, value: int) -> SpreadingFactor:
        """Coerce an integer into a spreading factor.

        Args:
            value: An integer in 7..12.

        Returns:
            The matching member.

        Raises:
            RadioParameterError: If the value is outside 7..12.
        """
        try:
            return cls(value)
        except ValueError:
            msg = f"Spreading factor must be within 7..12, got {value!r}."
            raise RadioParameterError(msg) from None


class Bandwidth(enum.IntEnum):
    """Channel bandwidths in kHz."""

    BW125 = 125
    BW250 = 250
    BW500 = 500

    @classmethod
    def parse(cls, value: int) -> Bandwidth:
        """Coerce an integer (kHz) into a bandwidth.

        Args:
            value: Bandwidth in kHz.

        Returns:
            The matching member.

        Raises:
            RadioParameterError: If the bandwidth is not 125, 250 or 500 kHz.
        """
        try:
            return cls(value)
        except ValueError:
            msg = f"Bandwidth must be one of 125, 250 or 500 kHz, got {value!r}."
            raise RadioParameterError(msg) from None

    @property
    def hertz(self) -> int:
        """Bandwidth in Hz."""
        return int(self) * 1000


class CodingRate(enum.IntEnum):
    """Forward error correction rates, valued by their denominator."""

    CR4_5 = 5
    CR4_6 = 6
    CR4_7 = 7
    CR4_8 = 8


class DataRate(enum.IntEnum):
    """EU868 data-rate indexes carried in the LinkADRReq DataRate field."""

    DR0 = 0
    DR1 = 1
    DR2 = 2
    DR3 = 3
    DR4 = 4
    DR5 = 5
    DR6 = 6
    DR7 = 7


_DR_TABLE: dict[int, tuple[SpreadingFactor, Bandwidth]] = {
    0: (SpreadingFactor.SF12, Bandwidth.BW125),
    1: (SpreadingFactor.SF11, Bandwidth.BW125),
    2: (SpreadingFactor.SF10, Bandwidth.BW125),
    3: (SpreadingFactor.SF9, Bandwidth.BW125),
    4: (SpreadingFactor.SF8, Bandwidth.BW125),
    5: (SpreadingFactor.SF7, Bandwidth.BW125),
    6: (SpreadingFactor.SF7, Bandwidth.BW250),
}
_DR_INVERSE = {radio: DataRate(dr) for dr, radio in _DR_TABLE.items()}

# Semtech SX1276 datasheet figures, dBm
_SENSITIVITY_DBM: dict[tuple[int, int], float] = {
    (7, 125): -123.0,
    (7, 250): -120.0,
    (7, 500): -116.0,
    (8, 125): -126.0,
    (8, 250): -123.0,
    (8, 500): -119.0,
    (9, 125): -129.0,
    (9, 250): -125.0,
    (9, 500): -122.0,
    (10, 125): -132.0,
    (10, 250): -128.0,
    (10, 500): -125.0,
    (11, 125): -133.0,
    (11, 250): -130.0,
    (11, 500): -128.0,
    (12, 125): -136.0,
    (12, 250): -133.0,
    (12, 500): -130.0,
}


@dataclasses.dataclass(frozen=True)
class RadioParams:
    """The PHY tuple carried by every uplink."""

    sf: SpreadingFactor
    bandwidth: Bandwidth = Bandwidth.BW125
    coding_rate: CodingRate = CodingRate.CR4_5
    tx_power: float = DEFAULT_TX_POWER_DBM
    channel_index: int = 0

    def __post_init__(self) -> None:
        """Coerce plain integers to enum members and check ranges.

        Raises:
            RadioParameterError: If any field is out of range.
        """
        object.__setattr__(self, "sf", SpreadingFactor.parse(self.sf))
        object.__setattr__(self, "bandwidth", Bandwidth.parse(self.bandwidth))
        try:
            object.__setattr__(self, "coding_rate", CodingRate(self.coding_rate))
        except ValueError:
            msg = f"Coding rate denominator must be 5..8, got {self.coding_rate!r}."
            raise RadioParameterError(msg) from None
        if self.tx_power > MAX_EIRP_DBM:
            msg = f"TX power {self.tx_power} dBm exceeds max EIRP {MAX_EIRP_DBM} dBm."
            raise RadioParameterError(msg)
        if not 0 <= self.channel_index < MAX_CHANNELS:
            msg = f"Channel index {self.channel_index} outside 0..{MAX_CHANNELS - 1}."
            raise RadioParameterError(msg)

    def replace(self, **changes: t.Any) -> RadioParams:
        """Return a copy with some fields changed.

        Args:
            changes: Field values to override.

        Returns:
            A new, validated RadioParams.
        """
        return dataclasses.replace(self, **changes)

    @property
    def data_rate(self) -> DataRate:
        """The EU868 data-rate index of this SF/bandwidth pair."""
        return radio_to_dr(self.sf, self.bandwidth)


@dataclasses.dataclass(frozen=True)
class ChannelPlan:
    """Ordered uplink channel center frequencies in MHz."""

    center_frequencies: tuple[float, ...] = EU868_FREQUENCIES

    def __post_init__(self) -> None:
        """Validate the frequency list.

        Raises:
            RadioParameterError: If the plan is empty, too long or not increasing.
        """
        freqs = tuple(float(f) for f in self.center_frequencies)
        if not 0 < len(freqs) <= MAX_CHANNELS:
            msg = f"A channel plan holds 1..{MAX_CHANNELS} channels, got {len(freqs)}."
            raise RadioParameterError(msg)
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            msg = f"Channel frequencies must be strictly increasing: {freqs}"
            raise RadioParameterError(msg)
        object.__setattr__(self, "center_frequencies", freqs)

    @classmethod
    def first(cls, count: int) -> ChannelPlan:
        """Build a plan from the first `count` EU868 channels.

        Args:
            count: Number of channels, 1..8.

        Returns:
            A channel plan.

        Raises:
            RadioParameterError: If more channels are requested than EU868 defines.
        """
        if not 0 < count <= len(EU868_FREQUENCIES):
            msg = f"Channel count must be within 1..{len(EU868_FREQUENCIES)}."
            raise RadioParameterError(msg)
        return cls(EU868_FREQUENCIES[:count])

    def __len__(self) -> int:
        """Number of channels in the plan."""
        return len(self.center_frequencies)

    def frequency(self, channel_index: int) -> float:
        """Center frequency of a channel.

        Args:
            channel_index: Zero-based channel index.

        Returns:
            Frequency in MHz.

        Raises:
            RadioParameterError: If the index is not in the plan.
        """
        if not 0 <= channel_index < len(self):
            msg = f"Channel {channel_index} is not in a {len(self)}-channel plan."
            raise RadioParameterError(msg)
        return self.center_frequencies[channel_index]


def symbol_time(sf: int, bandwidth: int) -> float:
    """Duration of one chirp symbol.

    Args:
        sf: Spreading factor.
        bandwidth: Bandwidth in kHz.

    Returns:
        Symbol duration in seconds.
    """
    return (2**sf) / (bandwidth * 1000)


def airtime(
    params: RadioParams,
    payload_len: int,
    preamble_len: int = DEFAULT_PREAMBLE_LEN,
    *,
    explicit_header: bool = True,
    low_dr_optimize: bool | None = None,
) -> float:
    """Time on air of one LoRa frame (CRC on), per the Semtech formula.

    Args:
        params: Radio parameters of the frame.
        payload_len: PHY payload length in bytes.
        preamble_len: Programmed preamble length in symbols.
        explicit_header: False for implicit-header mode.
        low_dr_optimize: Low data rate optimization. `None` enables it exactly
            where the transceiver mandates it (SF11/SF12 at 125 kHz).

    Returns:
        Duration in seconds.

    Raises:
        RadioParameterError: On an empty payload, a negative preamble, or when
            low data rate optimization is disabled where it is mandatory.
    """
    if payload_len < 1:
        msg = f"Payload length must be at least 1 byte, got {payload_len}."
        raise RadioParameterError(msg)
    if preamble_len < 0:
        msg = f"Preamble length must be non-negative, got {preamble_len}."
        raise RadioParameterError(msg)

    sf = int(params.sf)
    mandatory_de = sf in {11, 12} and params.bandwidth == Bandwidth.BW125
    if low_dr_optimize is None:
        low_dr_optimize = mandatory_de
    elif mandatory_de and not low_dr_optimize:
        msg = f"Low data rate optimization is mandatory at SF{sf}/125 kHz."
        raise RadioParameterError(msg)

    de = int(low_dr_optimize)
    ih = 0 if explicit_header else 1
    t_sym = symbol_time(sf, params.bandwidth)
    t_preamble = (preamble_len + 4.25) * t_sym

    numerator = 8 * payload_len - 4 * sf + 28 + 16 - 20 * ih
    denominator = 4 * (sf - 2 * de)
    blocks = max(-(-numerator // denominator), 0)
    n_payload = 8 + blocks * int(params.coding_rate)
    return t_preamble + n_payload * t_sym


def sensitivity(sf: int, bandwidth: int) -> float:
    """Receiver sensitivity for a spreading factor and bandwidth.

    Args:
        sf: Spreading factor.
        bandwidth: Bandwidth in kHz.

    Returns:
        Sensitivity in dBm.

    Raises:
        RadioParameterError: If the pair is not a tabulated cell.
    """
    try:
        return _SENSITIVITY_DBM[int(sf), int(bandwidth)]
    except KeyError:
        msg = f"No sensitivity figure for SF{sf} at {bandwidth} kHz."
        raise RadioParameterError(msg) from None


def dr_to_radio(dr: int) -> tuple[SpreadingFactor, Bandwidth]:
    """Map an EU868 data-rate index to its LoRa modulation.

    Args:
        dr: Data-rate index.

    Returns:
        The (spreading factor, bandwidth) pair.

    Raises:
        UnsupportedDataRateError: For DR7 (FSK) and undefined indexes.
    """
    try:
        return _DR_TABLE[int(dr)]
    except KeyError:
        msg = f"Data rate DR{dr} has no LoRa modulation in EU868."
        raise UnsupportedDataRateError(msg) from None


def radio_to_dr(sf: int, bandwidth: int) -> DataRate:
    """Map a LoRa modulation back to its EU868 data-rate index.

    Args:
        sf: Spreading factor.
        bandwidth: Bandwidth in kHz.

    Returns:
        The data-rate index.

    Raises:
        UnsupportedDataRateError: If EU868 defines no index for the pair.
    """
    try:
        return _DR_INVERSE[int(sf), int(bandwidth)]
    except KeyError:
        msg = f"SF{sf} at {bandwidth} kHz has no EU868 data-rate index."
        raise UnsupportedDataRateError(msg) from None

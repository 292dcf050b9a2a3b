"""LinkADRReq / LinkADRAns wire codec and their application to node radio state.

Wire layout of a LinkADRReq (5 bytes, little-endian ChMask)::

    | CID 0x03 | DataRate(7..4) TXPower(3..0) | ChMask (2 bytes) |
    | RFU(7) ChMaskCntl(6..4) NbTrans(3..0) |

A LinkADRAns is the CID followed by a status byte with the power, data-rate
and channel-mask ACK flags in bits 2, 1 and 0.
"""

from __future__ import annotations

import dataclasses
import logging
import struct
import typing as t

from lora_drcc.exceptions import (
    MacDecodingError,
    MacEncodingError,
    UnsupportedDataRateError,
)
from lora_drcc.radio import dr_to_radio

if t.TYPE_CHECKING:
    from lora_drcc.simulation import NodeState

__all__ = [
    "LINK_ADR_CID",
    "LinkADRAns",
    "LinkADRReq",
    "apply_link_adr",
    "decode_link_adr_ans",
    "decode_link_adr_req",
    "encode_link_adr_ans",
    "encode_link_adr_req",
]

logger = logging.getLogger(__name__)

LINK_ADR_CID = 0x03
LINK_ADR_REQ_LEN = 5
LINK_ADR_ANS_LEN = 2

# EU868 TXPower indexes 0..5; 0xF asks the node to keep its current power
TX_POWER_INDEXES = frozenset(range(6))
TX_POWER_KEEP = 0x0F

_REQ_STRUCT = struct.Struct("<BBHB")

_FIELD_BITS = {
    "data_rate": 4,
    "tx_power": 4,
    "ch_mask": 16,
    "ch_mask_cntl": 3,
    "nb_trans": 4,
    "rfu": 1,
}


@dataclasses.dataclass(frozen=True)
class LinkADRReq:
    """Server request to change a node's data rate, power and channel mask."""

    data_rate: int
    tx_power: int
    ch_mask: int
    ch_mask_cntl: int = 0
    nb_trans: int = 1
    rfu: int = 0

    @property
    def enabled_channels(self) -> list[int]:
        """Channel indexes whose ChMask bit is set."""
        return [i for i in range(16) if self.ch_mask >> i & 1]


@dataclasses.dataclass(frozen=True)
class LinkADRAns:
    """Node acknowledgement of a LinkADRReq."""

    power_ack: bool
    data_rate_ack: bool
    channel_mask_ack: bool

    @property
    def accepted(self) -> bool:
        """True when the node applied the whole request."""
        return self.power_ack and self.data_rate_ack and self.channel_mask_ack


def encode_link_adr_req(req: LinkADRReq) -> bytes:
    """Pack a LinkADRReq into its 5-byte wire form.

    Args:
        req: The request.

    Returns:
        CID-prefixed bytes.

    Raises:
        MacEncodingError: If a field overflows its width or the mask is empty.
    """
    for name, bits in _FIELD_BITS.items():
        value = getattr(req, name)
        if not 0 <= value < (1 << bits):
            msg = f"LinkADRReq field '{name}'={value} does not fit in {bits} bits."
            raise MacEncodingError(msg)
    if req.ch_mask == 0 and req.ch_mask_cntl == 0:
        msg = "LinkADRReq with ChMaskCntl=0 must enable at least one channel."
        raise MacEncodingError(msg)

    redundancy = req.rfu << 7 | req.ch_mask_cntl << 4 | req.nb_trans
    return _REQ_STRUCT.pack(
        LINK_ADR_CID,
        req.data_rate << 4 | req.tx_power,
        req.ch_mask,
        redundancy,
    )


def decode_link_adr_req(payload: bytes) -> LinkADRReq:
    """Unpack a LinkADRReq from its wire form.

    Args:
        payload: CID-prefixed bytes.

    Returns:
        The decoded request.

    Raises:
        MacDecodingError: On a wrong length or CID.
    """
    if len(payload) != LINK_ADR_REQ_LEN:
        msg = f"LinkADRReq is {LINK_ADR_REQ_LEN} bytes, got {len(payload)}."
        raise MacDecodingError(msg)
    cid, dr_power, ch_mask, redundancy = _REQ_STRUCT.unpack(payload)
    if cid != LINK_ADR_CID:
        msg = f"Expected CID 0x{LINK_ADR_CID:02X}, got 0x{cid:02X}."
        raise MacDecodingError(msg)
    return LinkADRReq(
        data_rate=dr_power >> 4,
        tx_power=dr_power & 0x0F,
        ch_mask=ch_mask,
        ch_mask_cntl=redundancy >> 4 & 0x07,
        nb_trans=redundancy & 0x0F,
        rfu=redundancy >> 7,
    )


def encode_link_adr_ans(ans: LinkADRAns) -> bytes:
    """Pack a LinkADRAns into its 2-byte wire form."""
    status = ans.power_ack << 2 | ans.data_rate_ack << 1 | ans.channel_mask_ack
    return bytes((LINK_ADR_CID, status))


def decode_link_adr_ans(payload: bytes) -> LinkADRAns:
    """Unpack a LinkADRAns.

    Args:
        payload: CID-prefixed bytes.

    Returns:
        The decoded answer.

    Raises:
        MacDecodingError: On a wrong length or CID.
    """
    if len(payload) != LINK_ADR_ANS_LEN or payload[0] != LINK_ADR_CID:
        msg = f"Not a LinkADRAns: {payload.hex()}"
        raise MacDecodingError(msg)
    status = payload[1]
    return LinkADRAns(
        power_ack=bool(status & 0b100),
        data_rate_ack=bool(status & 0b010),
        channel_mask_ack=bool(status & 0b001),
    )


def apply_link_adr(
    node: NodeState,
    req: LinkADRReq,
    *,
    channel_count: int,
) -> LinkADRAns:
    """Apply a decoded request to a node, all or nothing.

    Args:
        node: The node receiving the command.
        req: The decoded request.
        channel_count: Number of channels defined in the node's plan.

    Returns:
        The node's answer; the node is unchanged unless every flag is set.
    """
    try:
        sf, bandwidth = dr_to_radio(req.data_rate)
        data_rate_ack = True
    except UnsupportedDataRateError:
        data_rate_ack = False

    power_ack = req.tx_power in TX_POWER_INDEXES or req.tx_power == TX_POWER_KEEP

    enabled = req.enabled_channels
    channel_mask_ack = (
        req.ch_mask_cntl == 0
        and bool(enabled)
        and all(ch < channel_count for ch in enabled)
    )

    ans = LinkADRAns(
        power_ack=power_ack,
        data_rate_ack=data_rate_ack,
        channel_mask_ack=channel_mask_ack,
    )
    if not ans.accepted:
        logger.debug("Node %d rejected %s: %s", node.node_id, req, ans)
        return ans

    channel = (
        node.radio.channel_index if node.radio.channel_index in enabled else enabled[0]
    )
    node.radio = node.radio.replace(sf=sf, bandwidth=bandwidth, channel_index=channel)
    if req.tx_power != TX_POWER_KEEP:
        node.tx_power_index = req.tx_power
    if req.nb_trans:
        node.nb_trans = req.nb_trans
    return ans

"""Network-server schemes deciding each node's spreading factor and channel."""

from __future__ import annotations

from lora_drcc.schemes._state import (
    Assignment,
    EstimationWindow,
    ServerState,
    Thresholds,
    UplinkRecord,
    alpha,
    short_term_der,
    sqi,
)
from lora_drcc.schemes.adr import AdrScheme, basic_adr_step
from lora_drcc.schemes.core import Scheme, SchemeOptions, scheme_names
from lora_drcc.schemes.drcc import (
    DrccScheme,
    drcc_data_rate_step,
    initialize_channels,
    rebalance_on_change,
)
from lora_drcc.schemes.fair import FairScheme, fair_sf_allocation
from lora_drcc.schemes.static import StaticScheme

__all__ = [
    "AdrScheme",
    "Assignment",
    "DrccScheme",
    "EstimationWindow",
    "FairScheme",
    "Scheme",
    "SchemeOptions",
    "ServerState",
    "StaticScheme",
    "Thresholds",
    "UplinkRecord",
    "alpha",
    "basic_adr_step",
    "drcc_data_rate_step",
    "fair_sf_allocation",
    "initialize_channels",
    "rebalance_on_change",
    "scheme_names",
    "short_term_der",
    "sqi",
]

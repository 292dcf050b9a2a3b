"""Abstract base class and name registry for network-server schemes."""

from __future__ import annotations

import abc
import dataclasses
import logging
import re
import typing as t

from lora_drcc.exceptions import ConfigValidationError
from lora_drcc.mac import TX_POWER_KEEP, LinkADRReq
from lora_drcc.radio import Bandwidth, radio_to_dr
from lora_drcc.schemes._state import Thresholds

if t.TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy as np

    from lora_drcc.schemes._state import UplinkRecord
    from lora_drcc.simulation import NodeState

DEFAULT_ADR_HISTORY = 20
DEFAULT_ADR_MARGIN_DB = 10.0

_STATIC_NAME = re.compile(r"^static-sf(?P<sf>\d+)$")


@dataclasses.dataclass(frozen=True)
class SchemeOptions:
    """Settings shared by every scheme of one run."""

    channel_count: int
    total_nodes: int
    thresholds: Thresholds = dataclasses.field(default_factory=Thresholds)
    adr_history: int = DEFAULT_ADR_HISTORY
    adr_margin: float = DEFAULT_ADR_MARGIN_DB


def link_adr_command(
    sf: int,
    channel: int,
    bandwidth: int = Bandwidth.BW125,
) -> LinkADRReq:
    """Build the LinkADRReq moving a node to one SF and a single channel.

    TX power is left untouched.

    Args:
        sf: Target spreading factor.
        channel: The only channel to enable.
        bandwidth: Bandwidth in kHz.

    Returns:
        The request.
    """
    return LinkADRReq(
        data_rate=int(radio_to_dr(sf, bandwidth)),
        tx_power=TX_POWER_KEEP,
        ch_mask=1 << channel,
    )


class Scheme(metaclass=abc.ABCMeta):
    """Base class for network-server data-rate schemes.

    Subclasses register themselves under a name given as a class keyword::

        class MyScheme(Scheme, scheme_name="mine"): ...
    """

    schemes: t.ClassVar[dict[str, type[Scheme]]] = {}

    #: Registry name of the scheme.
    name: t.ClassVar[str]

    #: Whether the scheme changes node parameters during a run. Metrics of
    #: adaptive schemes skip the warm-up interval.
    adaptive: t.ClassVar[bool] = False

    def __init_subclass__(cls, scheme_name: str | None = None, **kwargs: t.Any) -> None:
        """Register a concrete subclass.

        Args:
            scheme_name: Name the scheme is selected by.
            kwargs: Forwarded to the parent hook.
        """
        super().__init_subclass__(**kwargs)
        if scheme_name is not None:
            cls.name = scheme_name
            cls.schemes[scheme_name] = cls

    def __init__(self, options: SchemeOptions) -> None:
        """Create a scheme for one run.

        Args:
            options: Run-wide scheme settings.
        """
        self.options = options
        self.logger = logging.getLogger(f"{__package__}.{self.name}")

    @classmethod
    def lookup(cls, name: str) -> tuple[type[Scheme], dict[str, t.Any]]:
        """Find the registered class and extra constructor arguments for a name.

        Args:
            name: One of ``static-sf7`` .. ``static-sf12``, ``adr``, ``fadr``
                or ``drcc``.

        Returns:
            The scheme class and the keyword arguments it is built with.

        Raises:
            ConfigValidationError: If the name is unknown.
        """
        match = _STATIC_NAME.match(name)
        if match and "static" in cls.schemes:
            sf = int(match["sf"])
            if 7 <= sf <= 12:  # noqa: PLR2004
                return cls.schemes["static"], {"sf": sf}
        elif name in cls.schemes and name != "static":
            return cls.schemes[name], {}

        msg = f"Unknown scheme '{name}'. Choose from: {', '.join(scheme_names())}."
        raise ConfigValidationError(msg, errors=[msg])

    @classmethod
    def from_name(cls, name: str, options: SchemeOptions) -> Scheme:
        """Instantiate a scheme by its CLI/config name.

        Args:
            name: A name accepted by :meth:`lookup`.
            options: Run-wide scheme settings.

        Returns:
            A fresh scheme instance.
        """
        scheme_class, kwargs = cls.lookup(name)
        return scheme_class(options, **kwargs)

    @abc.abstractmethod
    def setup(
        self,
        nodes: Sequence[NodeState],
        rng: np.random.Generator,
    ) -> dict[int, LinkADRReq]:
        """Assign initial parameters to the nodes present at start.

        Args:
            nodes: Nodes connected at time zero, in id order.
            rng: The scheme's random stream.

        Returns:
            Commands to apply right away, keyed by node id.
        """
        ...

    def on_uplink(self, record: UplinkRecord) -> LinkADRReq | None:  # noqa: ARG002, PLR6301
        """React to a received uplink.

        Args:
            record: The uplink as the server saw it.

        Returns:
            A command for the node's next downlink, if any.
        """
        return None

    @abc.abstractmethod
    def join(
        self,
        node: NodeState,
        rng: np.random.Generator,
    ) -> LinkADRReq | None:
        """Admit a node connecting mid-run.

        Args:
            node: The joining node.
            rng: The scheme's random stream.

        Returns:
            A command to apply right away, if any.
        """
        ...


def scheme_names() -> list[str]:
    """Every scheme name accepted by :meth:`Scheme.from_name`."""
    return [f"static-sf{sf}" for sf in range(7, 13)] + ["adr", "fadr", "drcc"]


def random_channel(rng: np.random.Generator, channel_count: int) -> int:
    """Draw a channel index uniformly at random."""
    return int(rng.integers(channel_count))

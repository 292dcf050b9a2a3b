"""Scenario configuration: JSON Schema, defaults and validation."""

from __future__ import annotations

import copy
import dataclasses
import logging
import typing as t

from jsonschema import Draft7Validator, validators

from lora_drcc.channel import PathLossParams
from lora_drcc.collision import DEFAULT_CAPTURE_THRESHOLD_DB, DEFAULT_DEMOD_CAPACITY
from lora_drcc.exceptions import ConfigValidationError
from lora_drcc.radio import (
    DEFAULT_PREAMBLE_LEN,
    DEFAULT_TX_POWER_DBM,
    EU868_FREQUENCIES,
    MAX_EIRP_DBM,
    ChannelPlan,
)
from lora_drcc.schemes import Scheme, SchemeOptions, Thresholds, scheme_names
from lora_drcc.schemes._state import DEFAULT_MTS, DEFAULT_PRI, DEFAULT_WINDOW
from lora_drcc.schemes.core import DEFAULT_ADR_HISTORY, DEFAULT_ADR_MARGIN_DB

if t.TYPE_CHECKING:
    from jsonschema.exceptions import ValidationError
    from jsonschema.protocols import Validator

logger = logging.getLogger(__name__)

UNLIMITED = "unlimited"
DEFAULT_DURATION_S = 7200.0
DEFAULT_WARMUP_FRACTION = 0.1

# Alternative spellings accepted in config files and the environment
CONFIG_ALIASES = {"nodes": "num_nodes"}


def _number(default: float, **bounds: float) -> dict[str, t.Any]:
    return {"type": "number", "default": default, **bounds}


def _integer(default: int, **bounds: int) -> dict[str, t.Any]:
    return {"type": "integer", "default": default, **bounds}


SCENARIO_SCHEMA: dict[str, t.Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "num_nodes": _integer(100, minimum=1),
        "radius": _number(50.0, exclusiveMinimum=0),
        "period": _number(30.0, exclusiveMinimum=0),
        "scheme": {"type": "string", "enum": scheme_names(), "default": "drcc"},
        "duration": _number(DEFAULT_DURATION_S, exclusiveMinimum=0),
        "seed": _integer(0, minimum=0),
        "channels": _integer(
            len(EU868_FREQUENCIES),
            minimum=1,
            maximum=len(EU868_FREQUENCIES),
        ),
        "payload": _integer(20, minimum=1, maximum=255),
        "preamble": _integer(DEFAULT_PREAMBLE_LEN, minimum=6, maximum=65535),
        "demod_capacity": {
            "oneOf": [
                {"type": "integer", "minimum": 1},
                {"const": UNLIMITED},
            ],
            "default": DEFAULT_DEMOD_CAPACITY,
        },
        "capture_threshold": _number(DEFAULT_CAPTURE_THRESHOLD_DB, minimum=0),
        "d0": _number(40.0, exclusiveMinimum=0),
        "lpl0": _number(127.41),
        "gamma": _number(2.08, minimum=0),
        "sigma": _number(0.0, minimum=0),
        "tx_power": _number(DEFAULT_TX_POWER_DBM, maximum=MAX_EIRP_DBM),
        "antenna_gains": _number(0.0),
        "noise_figure": _number(6.0, minimum=0),
        "mts": _number(DEFAULT_MTS, exclusiveMinimum=0, exclusiveMaximum=1),
        "pri": _number(DEFAULT_PRI, exclusiveMinimum=0, exclusiveMaximum=1),
        "window": _integer(DEFAULT_WINDOW, minimum=1),
        "adr_history": _integer(DEFAULT_ADR_HISTORY, minimum=1),
        "adr_margin": _number(DEFAULT_ADR_MARGIN_DB),
        "initial_sf": {
            "type": "string",
            "enum": ["feasible", "sf12", "random"],
            "default": "feasible",
        },
        "traffic": {
            "type": "string",
            "enum": ["exponential", "periodic"],
            "default": "exponential",
        },
        "jitter": _number(0.1, minimum=0, exclusiveMaximum=1),
        "duty_cycle": _number(0.0, minimum=0, maximum=1),
        "warmup_fraction": _number(
            DEFAULT_WARMUP_FRACTION,
            minimum=0,
            exclusiveMaximum=1,
        ),
        "late_join_fraction": _number(0.0, minimum=0, maximum=1),
        "metrics_log_level": {
            "type": "string",
            "enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
            "default": "INFO",
        },
    },
}


def extend_validator_with_defaults(validator_class):  # noqa: ANN001, ANN201
    """Fill in defaults, before validating with the provided JSON Schema Validator.

    Args:
        validator_class: The JSON Schema Validator class to extend.

    Returns:
        The extended JSON Schema Validator class.
    """
    validate_properties = validator_class.VALIDATORS["properties"]

    def set_defaults(
        validator: Validator,
        properties: t.Mapping[str, dict],
        instance: t.MutableMapping[str, t.Any],
        schema: dict,
    ) -> t.Generator[ValidationError, None, None]:
        for prop, subschema in properties.items():
            if "default" in subschema:
                instance.setdefault(prop, subschema["default"])

        yield from validate_properties(
            validator,
            properties,
            instance,
            schema,
        )

    return validators.extend(
        validator_class,
        {"properties": set_defaults},
    )


JSONSchemaValidator = extend_validator_with_defaults(Draft7Validator)


def resolve_aliases(config: t.Mapping[str, t.Any]) -> dict[str, t.Any]:
    """Rename alias keys to their canonical names.

    Args:
        config: A settings dictionary.

    Returns:
        A copy using canonical keys; a canonical key wins over its alias.
    """
    resolved: dict[str, t.Any] = {}
    for key, value in config.items():
        canonical = CONFIG_ALIASES.get(key, key)
        if canonical != key and canonical in config:
            continue
        resolved[canonical] = value
    return resolved


def validate_config(config: t.Mapping[str, t.Any]) -> dict[str, t.Any]:
    """Validate settings and fill in every default.

    Args:
        config: Raw settings, aliases allowed.

    Returns:
        The complete, validated settings dictionary.

    Raises:
        ConfigValidationError: Listing every problem found.
    """
    instance = copy.deepcopy(resolve_aliases(config))
    validator = JSONSchemaValidator(SCENARIO_SCHEMA)
    errors = [
        f"{'.'.join(map(str, e.path)) or 'config'}: {e.message}"
        for e in validator.iter_errors(instance)
    ]
    if not errors:
        if not instance["mts"] < instance["pri"]:
            errors.append(
                f"mts ({instance['mts']}) must be lower than pri ({instance['pri']}).",
            )
        if instance["late_join_fraction"] > 0 and instance["warmup_fraction"] == 0:
            errors.append("late_join_fraction needs a non-zero warmup_fraction.")

    if errors:
        summary = f"Config validation failed: {'; '.join(errors)}"
        raise ConfigValidationError(summary, errors=errors)
    return instance


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """Everything one simulation run depends on.

    Build instances with :meth:`from_dict`, which validates and fills defaults.
    """

    num_nodes: int
    radius: float
    period: float
    scheme: str
    duration: float
    seed: int
    channels: int
    payload: int
    preamble: int
    demod_capacity: int | None
    capture_threshold: float
    d0: float
    lpl0: float
    gamma: float
    sigma: float
    tx_power: float
    antenna_gains: float
    noise_figure: float
    mts: float
    pri: float
    window: int
    adr_history: int
    adr_margin: float
    initial_sf: str
    traffic: str
    jitter: float
    duty_cycle: float
    warmup_fraction: float
    late_join_fraction: float
    metrics_log_level: str

    @classmethod
    def from_dict(cls, config: t.Mapping[str, t.Any] | None = None) -> ScenarioConfig:
        """Validate settings and build a scenario.

        Args:
            config: Settings; missing keys take their defaults.

        Returns:
            A scenario.
        """
        settings = validate_config(config or {})
        if settings["demod_capacity"] == UNLIMITED:
            settings["demod_capacity"] = None
        return cls(**settings)

    def to_dict(self) -> dict[str, t.Any]:
        """Settings dictionary that :meth:`from_dict` maps back to this scenario."""
        settings = dataclasses.asdict(self)
        if self.demod_capacity is None:
            settings["demod_capacity"] = UNLIMITED
        return settings

    def replace(self, **changes: t.Any) -> ScenarioConfig:
        """Return a re-validated copy with some settings changed.

        Args:
            changes: Settings to override.

        Returns:
            A new scenario.
        """
        return ScenarioConfig.from_dict({**self.to_dict(), **changes})

    @property
    def path_loss(self) -> PathLossParams:
        """Path loss model parameters."""
        return PathLossParams(
            d0=self.d0,
            lpl0=self.lpl0,
            gamma=self.gamma,
            sigma=self.sigma,
        )

    @property
    def thresholds(self) -> Thresholds:
        """DER thresholds and window size of DRCC."""
        return Thresholds(mts=self.mts, pri=self.pri, window=self.window)

    @property
    def channel_plan(self) -> ChannelPlan:
        """The uplink channels in use."""
        return ChannelPlan.first(self.channels)

    @property
    def adaptive(self) -> bool:
        """Whether the scheme reconfigures nodes during the run."""
        scheme_class, _ = Scheme.lookup(self.scheme)
        return scheme_class.adaptive

    @property
    def measurement_start(self) -> float:
        """Simulated time from which metrics are collected."""
        return self.warmup_fraction * self.duration if self.adaptive else 0.0

    def scheme_options(self) -> SchemeOptions:
        """Scheme settings derived from this scenario."""
        return SchemeOptions(
            channel_count=self.channels,
            total_nodes=self.num_nodes,
            thresholds=self.thresholds,
            adr_history=self.adr_history,
            adr_margin=self.adr_margin,
        )

    def make_scheme(self) -> Scheme:
        """Fresh instance of the configured scheme."""
        return Scheme.from_name(self.scheme, self.scheme_options())

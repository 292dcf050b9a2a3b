"""Helpers for parsing and merging scenario settings from files and the environment."""

from __future__ import annotations

import logging
import os
import typing as t
from pathlib import Path

from dotenv import dotenv_values, find_dotenv, load_dotenv

from lora_drcc.exceptions import ConfigValidationError

logger = logging.getLogger(__name__)

ENV_PREFIX = "LORA_DRCC_"


def _schema_types(subschema: t.Mapping[str, t.Any]) -> list[str]:
    """JSON types a property accepts, including those of ``oneOf`` branches."""
    types = [subschema["type"]] if "type" in subschema else []
    for branch in subschema.get("oneOf", []):
        types.extend(_schema_types(branch))
    return types


def coerce_value(
    key: str,
    raw: str,
    subschema: t.Mapping[str, t.Any],
) -> t.Any:  # noqa: ANN401
    """Convert a textual setting to the JSON type its schema expects.

    Args:
        key: Setting name, for error messages.
        raw: The text as read from a file or the environment.
        subschema: The property's JSON Schema.

    Returns:
        An int, float or str. Text that matches no numeric type is returned
        unchanged so schema validation can report it.

    Raises:
        ValueError: If the text is empty.
    """
    text = raw.strip()
    if not text:
        msg = f"Setting '{key}' has an empty value."
        raise ValueError(msg)

    types = _schema_types(subschema)
    if "integer" in types:
        try:
            return int(text)
        except ValueError:
            pass
    if "number" in types:
        try:
            return float(text)
        except ValueError:
            pass
    return text


def coerce_config(
    raw_config: t.Mapping[str, str | None],
    config_schema: dict[str, t.Any],
    aliases: t.Mapping[str, str] | None = None,
) -> dict[str, t.Any]:
    """Coerce every textual setting of a flat mapping.

    Alias keys are renamed to their canonical names. Unknown keys are kept as
    text so validation can reject them by name.

    Args:
        raw_config: Settings as read from text.
        config_schema: A JSON Schema dictionary for the configuration.
        aliases: Alternative key names and their canonical names.

    Returns:
        The typed settings.

    Raises:
        ConfigValidationError: If a setting has no value.
    """
    aliases = aliases or {}
    properties = config_schema["properties"]
    config: dict[str, t.Any] = {}
    errors: list[str] = []
    for key, raw in raw_config.items():
        canonical = aliases.get(key, key)
        try:
            config[canonical] = coerce_value(
                key,
                raw or "",
                properties.get(canonical, {}),
            )
        except ValueError as ex:
            errors.append(str(ex))
    if errors:
        raise ConfigValidationError("; ".join(errors), errors=errors)
    return config


def read_config_file(
    path: Path | str,
    config_schema: dict[str, t.Any],
    aliases: t.Mapping[str, str] | None = None,
) -> dict[str, t.Any]:
    """Read a flat ``key = value`` settings file.

    Lines starting with ``#`` are comments. Values are typed per the schema.

    Args:
        path: The file to read, UTF-8.
        config_schema: A JSON Schema dictionary for the configuration.
        aliases: Alternative key names and their canonical names.

    Returns:
        The typed settings.
    """
    return coerce_config(
        dotenv_values(path, encoding="utf-8"),
        config_schema,
        aliases,
    )


def parse_environment_config(
    config_schema: dict[str, t.Any],
    prefix: str = ENV_PREFIX,
    dotenv_path: str | None = None,
) -> dict[str, t.Any]:
    """Parse configuration from environment variables.

    Args:
        config_schema: A JSON Schema dictionary for the configuration.
        prefix: Prefix for environment variables.
        dotenv_path: Path to a .env file. If None, will try to find one in increasingly
            higher folders.

    Returns:
        A configuration dictionary.
    """
    if not dotenv_path:
        dotenv_path = find_dotenv(usecwd=True)
    if dotenv_path:
        logger.debug("Loading configuration from %s", dotenv_path)
        load_dotenv(dotenv_path, override=False)

    raw: dict[str, str] = {}
    for config_key in config_schema["properties"]:
        env_var_name = prefix + config_key.upper().replace("-", "_")
        if env_var_name in os.environ:
            logger.info(
                "Parsing '%s' config from env variable '%s'.",
                config_key,
                env_var_name,
            )
            raw[config_key] = os.environ[env_var_name]
    return coerce_config(raw, config_schema)


def merge_config_sources(
    inputs: t.Iterable[str],
    config_schema: dict[str, t.Any],
    env_prefix: str = ENV_PREFIX,
    aliases: t.Mapping[str, str] | None = None,
) -> dict[str, t.Any]:
    """Merge configuration from multiple sources into a single dictionary.

    Args:
        inputs: A sequence of configuration sources (file paths or ENV).
        config_schema: A JSON Schema dictionary for the configuration.
        env_prefix: Prefix for environment variables.
        aliases: Alternative key names and their canonical names.

    Raises:
        FileNotFoundError: If any of config files does not exist.

    Returns:
        A single configuration dictionary; later sources win.
    """
    config: dict[str, t.Any] = {}
    for config_input in inputs:
        if config_input == "ENV":
            env_config = parse_environment_config(config_schema, prefix=env_prefix)
            config.update(env_config)
            continue

        config_path = Path(config_input)

        if not config_path.is_file():
            msg = (
                f"Could not locate config file at '{config_path}'. Please check that "
                "the file exists."
            )
            raise FileNotFoundError(msg)

        config.update(read_config_file(config_path, config_schema, aliases))

    return config

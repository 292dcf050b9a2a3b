"""Common CLI options for the simulator commands."""

from __future__ import annotations

import typing as t

import click


class CommaSeparated(click.ParamType):
    """A comma-separated list converted item by item."""

    name = "list"

    def __init__(self, item_type: t.Callable[[str], t.Any] = str) -> None:
        """Create the type.

        Args:
            item_type: Converter applied to each item.
        """
        self.item_type = item_type

    def convert(
        self,
        value: t.Any,  # noqa: ANN401
        param: click.Parameter | None,
        ctx: click.Context | None,
    ) -> list[t.Any]:
        """Split and convert a value.

        Args:
            value: Raw option value, or an already converted list.
            param: The parameter being converted.
            ctx: The click context.

        Returns:
            The converted items.
        """
        if isinstance(value, (list, tuple)):
            return list(value)
        items = [item.strip() for item in str(value).split(",") if item.strip()]
        try:
            return [self.item_type(item) for item in items]
        except ValueError as ex:
            self.fail(f"{value!r}: {ex}", param, ctx)


SCENARIO_CONFIG: t.Callable[..., t.Any] = click.option(
    "--config",
    "config_inputs",
    multiple=True,
    help="Scenario file location (key = value lines) or 'ENV' to use environment "
    "variables.",
    type=click.STRING,
    default=(),
)

SEED: t.Callable[..., t.Any] = click.option(
    "--seed",
    type=int,
    default=None,
    help="Base random seed.",
)

DURATION: t.Callable[..., t.Any] = click.option(
    "--duration",
    type=float,
    default=None,
    help="Simulated seconds per run.",
)

OUTPUT: t.Callable[..., t.Any] = click.option(
    "--out",
    type=click.File("w", encoding="utf-8", lazy=True),
    default="-",
    help="CSV output path; standard out by default.",
)

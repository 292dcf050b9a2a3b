"""The ``lora-drcc`` command line: single runs, sweeps and analytic tables."""

from __future__ import annotations

import csv
import io
import logging
import os
import sys
import typing as t
from importlib import metadata

import click

from lora_drcc import metrics
from lora_drcc.channel import PathLossParams, max_range
from lora_drcc.cli import common_options
from lora_drcc.configuration._dict_config import merge_config_sources
from lora_drcc.exceptions import ChannelModelError, ConfigValidationError
from lora_drcc.helpers._util import dump_json, format_float
from lora_drcc.radio import (
    DEFAULT_PREAMBLE_LEN,
    DEFAULT_TX_POWER_DBM,
    MAX_EIRP_DBM,
    Bandwidth,
    RadioParams,
    SpreadingFactor,
    airtime,
    sensitivity,
)
from lora_drcc.reports import compute_metrics
from lora_drcc.scenario import CONFIG_ALIASES, SCENARIO_SCHEMA, ScenarioConfig
from lora_drcc.schemes import scheme_names
from lora_drcc.simulation import Simulator
from lora_drcc.sweeps import get_experiment, run_sweep, write_csv

if t.TYPE_CHECKING:
    from collections.abc import Sequence

CLI_NAME = "lora-drcc"
PACKAGE_NAME = "lora-drcc"

EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2

AIRTIME_CSV_HEADER = ("sf", "bandwidth_khz", "airtime_ms")
RANGE_CSV_HEADER = ("sf", "bandwidth_khz", "sensitivity_dbm", "range_m")


def get_logger() -> logging.Logger:
    """Get the CLI logger.

    Returns:
        The logger, with its level taken from ``LORA_DRCC_LOGLEVEL`` or
        ``LOGLEVEL`` when either is set.
    """
    env_prefix = f"{CLI_NAME.upper().replace('-', '_')}_"
    log_level = os.environ.get(f"{env_prefix}LOGLEVEL") or os.environ.get("LOGLEVEL")

    logger = logging.getLogger(__name__)

    if log_level is not None and log_level.upper() in logging._levelToName.values():  # noqa: SLF001
        logger.setLevel(log_level.upper())

    return logger


def _get_package_version() -> str:
    try:
        return metadata.version(PACKAGE_NAME)
    except metadata.PackageNotFoundError:
        return "[could not be detected]"


class SimulatorCommand(click.Command):
    """Command class reporting configuration errors as exit code 1."""

    def invoke(self, ctx: click.Context) -> t.Any:  # noqa: ANN401
        """Invoke the command, capturing warnings and logging them.

        Args:
            ctx: The `click` context.

        Returns:
            The result of the command invocation.
        """
        logging.captureWarnings(capture=True)
        try:
            return super().invoke(ctx)
        except ConfigValidationError as exc:
            logger = get_logger()
            for error in exc.errors or [str(exc)]:
                logger.error("Config validation error: %s", error)  # noqa: TRY400
            sys.exit(EXIT_CONFIG_ERROR)


class SimulatorGroup(click.Group):
    """Command group mapping failures to the documented exit codes.

    Usage errors print the usage text and exit 1. Any other exception escaping
    a command is logged with its traceback and exits 2.
    """

    command_class = SimulatorCommand

    def main(  # type: ignore[override]
        self,
        *args: t.Any,
        standalone_mode: bool = True,
        **kwargs: t.Any,
    ) -> t.Any:  # noqa: ANN401
        """Run the group.

        Args:
            args: Positional `click.Group.main` arguments.
            standalone_mode: Exit the interpreter when done, as click does.
            kwargs: Keyword `click.Group.main` arguments.

        Returns:
            The command's return value when not in standalone mode.
        """
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_CONFIG_ERROR)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_CONFIG_ERROR)
        except Exception:
            get_logger().exception("Command failed.")
            sys.exit(EXIT_RUNTIME_ERROR)

        if not standalone_mode:
            return rv
        sys.exit(rv if isinstance(rv, int) else 0)


def load_scenario(
    config_inputs: Sequence[str],
    **flags: t.Any,
) -> ScenarioConfig:
    """Merge config sources and command-line flags into a scenario.

    Args:
        config_inputs: Config file paths, or ``ENV`` for the environment.
        flags: Canonical settings from flags; ``None`` means not given.

    Returns:
        The validated scenario.

    Raises:
        ConfigValidationError: If a file is missing or a setting is invalid.
    """
    try:
        settings = merge_config_sources(
            config_inputs,
            SCENARIO_SCHEMA,
            aliases=CONFIG_ALIASES,
        )
    except FileNotFoundError as ex:
        raise ConfigValidationError(str(ex), errors=[str(ex)]) from ex
    settings.update({key: value for key, value in flags.items() if value is not None})
    scenario = ScenarioConfig.from_dict(settings)
    metrics.get_metrics_logger().setLevel(scenario.metrics_log_level.upper())
    return scenario


def _scheme_name(value: str) -> str:
    if value not in scheme_names():
        msg = f"unknown scheme '{value}', choose from {', '.join(scheme_names())}"
        raise ValueError(msg)
    return value


def _echo_csv(header: Sequence[str], rows: t.Iterable[Sequence[str]]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    click.echo(buffer.getvalue(), nl=False)


@click.group(cls=SimulatorGroup, name=CLI_NAME)
@click.version_option(
    _get_package_version(),
    "--version",
    prog_name=CLI_NAME,
    message="%(prog)s v%(version)s",
)
def cli() -> None:
    """Simulate a LoRa cell under DRCC, ADR, fair or static SF assignment."""
    metrics._setup_logging()  # noqa: SLF001


@cli.command()
@common_options.SCENARIO_CONFIG
@click.option(
    "--scheme",
    type=click.Choice(scheme_names()),
    default=None,
    help="Server scheme.",
)
@click.option("--nodes", "num_nodes", type=int, default=None, help="Node count.")
@click.option("--radius", type=float, default=None, help="Cell radius, meters.")
@click.option("--period", type=float, default=None, help="Mean uplink period, s.")
@common_options.DURATION
@common_options.SEED
@click.option("--channels", type=int, default=None, help="Uplink channels, 1-8.")
@click.option(
    "--out",
    type=click.File("w", encoding="utf-8", lazy=True),
    default=None,
    help="Write the per-transmission event log to this CSV file.",
)
def run(
    config_inputs: Sequence[str],
    out: t.TextIO | None,
    **flags: t.Any,
) -> None:
    """Run one scenario and print its delivery summary as JSON."""
    scenario = load_scenario(config_inputs, **flags)
    log = Simulator(scenario).run()
    if out is not None:
        log.to_csv(out)
    report = compute_metrics(log, since=scenario.measurement_start)
    summary = {
        "scenario": scenario.to_dict(),
        "measurement_start": scenario.measurement_start,
        **report.to_dict(),
    }
    click.echo(dump_json(summary))


@cli.command()
@click.argument("experiment_name", metavar="NAME")
@click.option(
    "--schemes",
    type=common_options.CommaSeparated(_scheme_name),
    default=None,
    help="Comma-separated scheme names; all schemes by default.",
)
@click.option(
    "--nodes",
    "node_counts",
    type=common_options.CommaSeparated(int),
    default=None,
    help="Comma-separated node counts for node-count sweeps.",
)
@click.option(
    "--radii",
    type=common_options.CommaSeparated(float),
    default=None,
    help="Comma-separated cell radii in meters for the radius sweep.",
)
@common_options.SEED
@common_options.DURATION
@click.option(
    "--repeats",
    type=click.IntRange(min=1),
    default=1,
    help="Independent seeds per point.",
)
@click.option(
    "--jobs",
    type=int,
    default=1,
    help="Parallel worker processes; -1 uses every core.",
)
@common_options.OUTPUT
@common_options.SCENARIO_CONFIG
def sweep(  # noqa: PLR0913, PLR0917
    experiment_name: str,
    schemes: list[str] | None,
    node_counts: list[int] | None,
    radii: list[float] | None,
    seed: int | None,
    duration: float | None,
    repeats: int,
    jobs: int,
    out: t.TextIO,
    config_inputs: Sequence[str],
) -> None:
    """Run the named experiment (fig4, fig5, fig6 or exp1..exp3) as CSV."""
    experiment = get_experiment(experiment_name)
    if experiment.axis == "nodes":
        axis, unused = node_counts, ("--radii", radii)
    else:
        axis, unused = radii, ("--nodes", node_counts)
    if unused[1] is not None:
        msg = f"{experiment.name} sweeps {experiment.axis}; {unused[0]} does not apply."
        raise ConfigValidationError(msg, errors=[msg])

    base = load_scenario(config_inputs, duration=duration)
    overrides = {
        key: value
        for key, value in base.to_dict().items()
        if key not in {"num_nodes", "radius", "period", "scheme", "seed"}
    }
    rows = run_sweep(
        experiment,
        schemes,
        axis,
        seed=base.seed if seed is None else seed,
        repeats=repeats,
        jobs=jobs,
        overrides=overrides,
    )
    write_csv(rows, out)


@cli.command(name="airtime")
@click.option(
    "--payload",
    type=click.IntRange(min=1, max=255),
    default=20,
    show_default=True,
    help="PHY payload length, bytes.",
)
@click.option(
    "--preamble",
    type=click.IntRange(min=0),
    default=DEFAULT_PREAMBLE_LEN,
    show_default=True,
    help="Preamble length, symbols.",
)
def airtime_table(payload: int, preamble: int) -> None:
    """Print the time on air of every SF and bandwidth as CSV."""
    _echo_csv(
        AIRTIME_CSV_HEADER,
        (
            (
                str(int(sf)),
                str(int(bw)),
                format_float(airtime(RadioParams(sf, bw), payload, preamble) * 1e3, 3),
            )
            for bw in Bandwidth
            for sf in SpreadingFactor
        ),
    )


@cli.command(name="range")
@click.option(
    "--tx-power",
    type=click.FloatRange(max=MAX_EIRP_DBM),
    default=DEFAULT_TX_POWER_DBM,
    show_default=True,
    help="TX power, dBm.",
)
@click.option("--antenna-gains", type=float, default=0.0, help="Antenna gains, dB.")
@click.option("--d0", type=float, default=None, help="Reference distance, m.")
@click.option("--lpl0", type=float, default=None, help="Path loss at d0, dB.")
@click.option("--gamma", type=float, default=None, help="Path loss exponent.")
def range_table(
    tx_power: float,
    antenna_gains: float,
    **path_loss: float | None,
) -> None:
    """Print receiver sensitivity and maximum range of every SF and bandwidth."""
    try:
        params = PathLossParams(
            **{key: value for key, value in path_loss.items() if value is not None},
        )
    except ChannelModelError as ex:
        raise ConfigValidationError(str(ex), errors=[str(ex)]) from ex
    rows = []
    for bw in Bandwidth:
        for sf in SpreadingFactor:
            link = max_range(sf, bw, tx_power, params, antenna_gains)
            rows.append(
                (
                    str(int(sf)),
                    str(int(bw)),
                    format_float(sensitivity(sf, bw), 1),
                    format_float(link.distance, 3),
                ),
            )
    _echo_csv(RANGE_CSV_HEADER, rows)

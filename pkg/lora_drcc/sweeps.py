"""Parameter sweeps over node count or deployment radius, reported as CSV.

Usage example:
--------------
.. code-block:: python

    rows = run_experiment_3(["drcc", "adr"], [100, 500, 1000], seed=42)
    write_csv(rows, sys.stdout)
"""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import typing as t

from joblib import Parallel, delayed, parallel_config

from lora_drcc import metrics
from lora_drcc.exceptions import ConfigValidationError
from lora_drcc.helpers._util import format_float
from lora_drcc.reports import compute_metrics
from lora_drcc.scenario import ScenarioConfig
from lora_drcc.schemes import scheme_names
from lora_drcc.simulation import run

if t.TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

logger = logging.getLogger(__name__)

SWEEP_CSV_HEADER = (
    "experiment",
    "scheme",
    "nodes",
    "radius_m",
    "period_s",
    "seed",
    "der",
)


@dataclasses.dataclass(frozen=True)
class Experiment:
    """A sweep: fixed deployment settings plus one swept axis."""

    name: str
    axis: t.Literal["nodes", "radius"]
    num_nodes: int
    radius: float
    period: float
    default_axis: tuple[float, ...]

    def settings(self, value: float) -> dict[str, t.Any]:
        """Scenario settings of one point on the axis."""
        settings: dict[str, t.Any] = {
            "num_nodes": self.num_nodes,
            "radius": self.radius,
            "period": self.period,
        }
        if self.axis == "nodes":
            settings["num_nodes"] = int(value)
        else:
            settings["radius"] = float(value)
        return settings


EXPERIMENTS: dict[str, Experiment] = {
    "fig4": Experiment(
        name="fig4",
        axis="nodes",
        num_nodes=100,
        radius=50.0,
        period=30.0,
        default_axis=(100, 200, 300, 400, 500, 600),
    ),
    "fig5": Experiment(
        name="fig5",
        axis="radius",
        num_nodes=1000,
        radius=50.0,
        period=100.0,
        default_axis=(50, 100, 150, 200, 250, 300, 350),
    ),
    "fig6": Experiment(
        name="fig6",
        axis="nodes",
        num_nodes=100,
        radius=200.0,
        period=100.0,
        default_axis=(100, 200, 300, 400, 500, 600, 700, 800, 900, 1000),
    ),
}
EXPERIMENT_ALIASES = {"exp1": "fig4", "exp2": "fig5", "exp3": "fig6"}


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """Result of one (scheme, point, repeat) run."""

    experiment: str
    scheme: str
    nodes: int
    radius_m: float
    period_s: float
    seed: int
    der: float

    def to_row(self) -> tuple[str, ...]:
        """CSV cells in :data:`SWEEP_CSV_HEADER` order."""
        return (
            self.experiment,
            self.scheme,
            str(self.nodes),
            f"{self.radius_m:g}",
            f"{self.period_s:g}",
            str(self.seed),
            format_float(self.der),
        )


def get_experiment(name: str) -> Experiment:
    """Look an experiment up by name or ``expN`` alias.

    Args:
        name: ``fig4``, ``fig5``, ``fig6`` or ``exp1`` .. ``exp3``.

    Returns:
        The experiment.

    Raises:
        ConfigValidationError: If the name is unknown.
    """
    try:
        return EXPERIMENTS[EXPERIMENT_ALIASES.get(name, name)]
    except KeyError:
        choices = [*EXPERIMENTS, *EXPERIMENT_ALIASES]
        msg = f"Unknown experiment '{name}'. Choose from: {', '.join(choices)}."
        raise ConfigValidationError(msg, errors=[msg]) from None


def sweep_scenarios(
    experiment: Experiment,
    schemes: Sequence[str],
    axis: Sequence[float],
    *,
    seed: int = 0,
    repeats: int = 1,
    overrides: Mapping[str, t.Any] | None = None,
) -> list[ScenarioConfig]:
    """Validated scenarios of a sweep in output order.

    Rows run scheme-major, then along the axis, then over repeats. All schemes
    share the seed of a point, so they see the same deployment.

    Args:
        experiment: The sweep definition.
        schemes: Scheme names.
        axis: Node counts or radii.
        seed: Base seed.
        repeats: Independent seeds per point.
        overrides: Extra scenario settings applied to every point.

    Returns:
        One scenario per output row.

    Raises:
        ConfigValidationError: If repeats < 1 or any scenario is invalid.
    """
    if repeats < 1:
        msg = f"repeats must be at least 1, got {repeats}."
        raise ConfigValidationError(msg, errors=[msg])
    base = dict(overrides or {})
    return [
        ScenarioConfig.from_dict(
            {
                **base,
                **experiment.settings(value),
                "scheme": scheme,
                "seed": seed + repeat * len(axis) + index,
            },
        )
        for scheme in schemes
        for index, value in enumerate(axis)
        for repeat in range(repeats)
    ]


def run_point(experiment: str, scenario: ScenarioConfig) -> SweepRow:
    """Run one scenario and measure its DER after warm-up.

    Args:
        experiment: Experiment name for the row.
        scenario: The point's scenario.

    Returns:
        The CSV row.
    """
    with metrics.sweep_point_timer(
        experiment,
        scheme=scenario.scheme,
        nodes=scenario.num_nodes,
        radius_m=scenario.radius,
        seed=scenario.seed,
    ):
        report = compute_metrics(run(scenario), since=scenario.measurement_start)
    return SweepRow(
        experiment=experiment,
        scheme=scenario.scheme,
        nodes=scenario.num_nodes,
        radius_m=scenario.radius,
        period_s=scenario.period,
        seed=scenario.seed,
        der=report.global_der,
    )


def run_sweep(
    experiment: Experiment | str,
    schemes: Sequence[str] | None = None,
    axis: Sequence[float] | None = None,
    *,
    seed: int = 0,
    repeats: int = 1,
    jobs: int = 1,
    overrides: Mapping[str, t.Any] | None = None,
) -> list[SweepRow]:
    """Run every point of a sweep.

    Args:
        experiment: Experiment or its name.
        schemes: Scheme names; all schemes when omitted.
        axis: Axis values; the experiment's defaults when omitted.
        seed: Base seed.
        repeats: Independent seeds per point.
        jobs: Parallel workers; rows keep sweep order regardless.
        overrides: Extra scenario settings applied to every point.

    Returns:
        One row per (scheme, point, repeat).
    """
    if isinstance(experiment, str):
        experiment = get_experiment(experiment)
    scenarios = sweep_scenarios(
        experiment,
        schemes or scheme_names(),
        axis or experiment.default_axis,
        seed=seed,
        repeats=repeats,
        overrides=overrides,
    )
    logger.info(
        "Running %s: %d points on %d worker(s).",
        experiment.name,
        len(scenarios),
        jobs,
    )
    with parallel_config(n_jobs=jobs):
        rows = Parallel()(
            delayed(run_point)(experiment.name, scenario) for scenario in scenarios
        )
    return list(rows)


def run_experiment_1(
    schemes: Sequence[str],
    node_counts: Sequence[int],
    seed: int = 0,
    **kwargs: t.Any,
) -> list[SweepRow]:
    """Node-count sweep in a 50 m cell with 30 s traffic.

    Args:
        schemes: Scheme names.
        node_counts: Node counts to sweep.
        seed: Base seed.
        kwargs: Forwarded to :func:`run_sweep`.

    Returns:
        The sweep rows.
    """
    return run_sweep("fig4", schemes, node_counts, seed=seed, **kwargs)


def run_experiment_2(
    schemes: Sequence[str],
    radii: Sequence[float],
    seed: int = 0,
    **kwargs: t.Any,
) -> list[SweepRow]:
    """Radius sweep of 1000 nodes with 100 s traffic.

    Args:
        schemes: Scheme names.
        radii: Cell radii to sweep, meters.
        seed: Base seed.
        kwargs: Forwarded to :func:`run_sweep`.

    Returns:
        The sweep rows.
    """
    return run_sweep("fig5", schemes, radii, seed=seed, **kwargs)


def run_experiment_3(
    schemes: Sequence[str],
    node_counts: Sequence[int],
    seed: int = 0,
    **kwargs: t.Any,
) -> list[SweepRow]:
    """Node-count sweep in a 200 m cell with 100 s traffic.

    Args:
        schemes: Scheme names.
        node_counts: Node counts to sweep.
        seed: Base seed.
        kwargs: Forwarded to :func:`run_sweep`.

    Returns:
        The sweep rows.
    """
    return run_sweep("fig6", schemes, node_counts, seed=seed, **kwargs)


def write_csv(rows: Sequence[SweepRow], stream: t.TextIO) -> None:
    """Write sweep rows with a header, LF line endings.

    Args:
        rows: Sweep results.
        stream: Text stream to write to.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_CSV_HEADER)
    writer.writerows(row.to_row() for row in rows)


def format_csv(rows: Sequence[SweepRow]) -> str:
    """Sweep rows as CSV text."""
    buffer = io.StringIO()
    write_csv(rows, buffer)
    return buffer.getvalue()

"""
Command line driver.

Subcommands:

- ``run``: flow the configured initial data and write diagnostics, snapshots
  and a report.
- ``verify``: run the residual suite on a single conformal factor.
- ``steady``: generate a (boosted) member of the constant curvature family.
- ``fit``: fit a snapshot to the constant curvature family.
- ``report``: summarize a run directory.

Exit status is 0 on success, 1 when a domain error occurs or ``verify`` finds a
failing check, and 2 on usage errors.
"""

import argparse
import datetime
import json
import logging
import sys
import uuid
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .config import RunConfig, load_config
from .context import SuiteContext
from .errors import (
    GridError,
    InsufficientDataError,
    LightconeFlowError,
    TrajectoryTooSparseError,
)
from .flow import FlowMode, TrajectoryLog, renormalize_trajectory, run_flow, trajectory_summary
from .geometry import ConformalFactor
from .initial import initial_omega
from .serialization import (
    FitSummary,
    RunReport,
    load_trajectory,
    read_snapshot,
    snapshot_name,
    write_outputs,
    write_report,
    write_snapshot,
)
from .spectral import SphereGrid
from .steady import (
    BoostSpec,
    SteadyStateParams,
    boost_cross_section,
    fit_constant_curvature,
    mobius_omega,
)
from .suite import StandardSuite
from .types import SuiteDefinitionType
from .utils import load_suite, to_dict, to_kwargs
from .verification import (
    ResidualReport,
    check_codazzi,
    check_evolution,
    check_gauss,
    check_gradient_estimate,
    check_monotonicity_decay,
    check_simons,
    fit_decay,
    monitor_barrier,
    refinement_study,
)

logger = logging.getLogger(__name__)

DETERMINISTIC_IDENTIFIER = "deterministic"

_REFINEMENT_CHECKS: Dict[str, Callable[[ConformalFactor], ResidualReport]] = {
    "codazzi": check_codazzi,
    "simons": check_simons,
    "gauss": check_gauss,
}


def _vector(text: str) -> tuple:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma separated numbers, got '{text}'")
    try:
        return tuple(float(part) for part in parts)
    except ValueError as ex:
        raise argparse.ArgumentTypeError(str(ex)) from ex


def build_parser() -> argparse.ArgumentParser:
    """The argument parser of the ``lcflow`` command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="configuration file (key = value lines)")
    common.add_argument("--out", type=Path, help="output directory, overrides output.directory")
    common.add_argument("--seed", type=int, help="seed of random initial data, overrides seed")
    common.add_argument(
        "--deterministic",
        action="store_true",
        default=None,
        help="leave timestamps and random identifiers out of report.json",
    )
    common.add_argument("--verbose", "-v", action="store_true", help="log at DEBUG level")

    parser = argparse.ArgumentParser(
        prog="lcflow",
        description="Null mean curvature flow of lightcone cross sections.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser("run", parents=[common], help="flow the configured initial data")

    verify = subparsers.add_parser(
        "verify", parents=[common], help="residual suite on a single conformal factor"
    )
    verify.add_argument("snapshot", nargs="?", type=Path, help="snapshot file; default initial data")
    verify.add_argument("--suite", help="module:Class of a suite definition")
    verify.add_argument(
        "--refine",
        action="store_true",
        help="also repeat curvature identities at bandlimits 16, 24 and 32",
    )

    steady = subparsers.add_parser(
        "steady", parents=[common], help="generate a constant curvature cross section"
    )
    steady.add_argument("--c", type=float, default=1.0, help="scale c > 0")
    steady.add_argument("--a", type=_vector, default=(0.0, 0.0, 0.0), help="boost parameter x,y,z")
    steady.add_argument("--rapidity", type=float, default=0.0, help="rapidity of an extra boost")
    steady.add_argument("--axis", type=_vector, default=(0.0, 0.0, 1.0), help="unit boost axis")

    fit = subparsers.add_parser("fit", parents=[common], help="fit a snapshot")
    fit.add_argument("path", type=Path, help="snapshot file or run directory")

    report = subparsers.add_parser("report", parents=[common], help="summarize a run directory")
    report.add_argument("directory", type=Path, help="run directory")
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _load(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    return config.with_overrides(out=args.out, seed=args.seed, deterministic=args.deterministic)


def _new_report(command: str, config: RunConfig, **kwargs: Any) -> RunReport:
    from . import __version__  # pylint: disable=import-outside-toplevel

    deterministic = config.output.deterministic
    base = to_dict(
        command=command,
        version=__version__,
        identifier=DETERMINISTIC_IDENTIFIER if deterministic else uuid.uuid4().hex,
        created=(
            None if deterministic else datetime.datetime.now(datetime.timezone.utc).isoformat()
        ),
        config=config.model_dump(mode="json"),
    )
    return RunReport(**to_kwargs(base, **kwargs))


def _fit_summary(omega: ConformalFactor) -> Optional[FitSummary]:
    try:
        params, residual = fit_constant_curvature(omega)
    except LightconeFlowError as ex:
        logger.warning("No constant curvature fit: %s", ex)
        return None
    return FitSummary(c=params.c, a=list(params.a), residual=residual)


def _optional_check(
    name: str, check: Callable[[], ResidualReport]
) -> Optional[ResidualReport]:
    try:
        return check()
    except (InsufficientDataError, TrajectoryTooSparseError) as ex:
        logger.warning("Skipping %s check: %s", name, ex)
        return None


def trajectory_reports(
    traj: TrajectoryLog, config: RunConfig
) -> tuple[List[ResidualReport], Dict[str, Optional[float]]]:
    """
    Trajectory checks applicable to the run mode, and fitted decay slopes.

    Unnormalized runs are also renormalized to check the decay estimates.
    Checks lacking data are skipped with a warning.
    """
    tolerances = config.verify.tolerances
    candidates: List[Optional[ResidualReport]] = []
    decay_source: Optional[TrajectoryLog] = traj

    if traj.metadata.options.mode is FlowMode.UNNORMALIZED:
        candidates.append(
            _optional_check("evolution", lambda: check_evolution(traj, tolerances.evolution))
        )
        candidates.append(
            _optional_check(
                "gradient_estimate",
                lambda: check_gradient_estimate(traj, tol=tolerances.gradient_estimate),
            )
        )
        try:
            decay_source = renormalize_trajectory(traj)
        except TrajectoryTooSparseError as ex:
            logger.warning("Skipping renormalization: %s", ex)
            decay_source = None

    if decay_source is not None:
        source = decay_source
        candidates.append(
            _optional_check(
                "monotonicity_decay",
                lambda: check_monotonicity_decay(source, tol=tolerances.monotonicity),
            )
        )
    candidates.append(_optional_check("barrier", lambda: monitor_barrier(traj)))

    reports = [report for report in candidates if report is not None]
    slopes: Dict[str, Optional[float]] = {}
    for report in reports:
        for name, fit in report.details.get("fits", {}).items():
            slopes[name] = fit["slope"]
    return reports, slopes


def command_run(args: argparse.Namespace, config: RunConfig) -> int:
    grid = config.grid.build()
    omega0 = initial_omega(config.initial, grid, seed=config.seed)
    traj = run_flow(omega0, config.flow_options())

    reports: List[ResidualReport] = []
    slopes: Dict[str, Optional[float]] = {}
    if config.verify.trajectory:
        reports, slopes = trajectory_reports(traj, config)

    final = traj.conformal_factor(traj.snapshots[-1]) if traj.snapshots else omega0
    report = _new_report(
        "run",
        config,
        metadata=traj.metadata,
        summary=trajectory_summary(traj),
        reports=reports,
        fit=_fit_summary(final),
        slopes=slopes,
    )
    write_outputs(
        config.output.directory,
        report,
        traj=traj,
        csv=config.output.csv,
        snapshots=config.output.snapshots,
    )
    return 0


def _suite_definition(args: argparse.Namespace, config: RunConfig) -> SuiteDefinitionType:
    reference = args.suite or config.verify.suite
    if reference is None:
        return StandardSuite
    module_name, _, class_name = reference.partition(":")
    return load_suite(module_name, class_name)


def _snapshot_factor(path: Path, grid: SphereGrid) -> ConformalFactor:
    snapshot = read_snapshot(path)
    if snapshot.values.shape != grid.shape:
        raise GridError(
            f"Snapshot {path} has shape {snapshot.values.shape}, the configured {grid} "
            f"expects {grid.shape}; set grid.L and grid.oversample to match."
        )
    return ConformalFactor(grid, snapshot.values)


def command_verify(args: argparse.Namespace, config: RunConfig) -> int:
    grid = config.grid.build()
    if args.snapshot is not None:
        omega = _snapshot_factor(args.snapshot, grid)
    else:
        omega = initial_omega(config.initial, grid, seed=config.seed)

    definition: SuiteDefinitionType = _suite_definition(args, config)
    result = definition.run(
        SuiteContext(
            omega=omega,
            tolerances=config.verify.tolerances,
            max_workers=config.verify.max_workers,
        ),
        identifier=DETERMINISTIC_IDENTIFIER if config.output.deterministic else None,
        options={"checks": config.verify.checks, "variations": config.verify.variations},
    )

    reports: List[ResidualReport] = []
    if args.refine:
        if args.snapshot is not None:
            logger.warning("Refinement needs generated initial data; ignoring --refine.")
        else:
            for name, check in _REFINEMENT_CHECKS.items():
                if name in config.verify.checks:
                    reports.append(
                        refinement_study(
                            lambda g: initial_omega(config.initial, g, seed=config.seed),
                            check,
                            oversample=config.grid.oversample,
                        )
                    )

    report = _new_report("verify", config, suite=result, reports=reports, fit=_fit_summary(omega))
    write_outputs(config.output.directory, report)
    if not report.passed:
        logger.error("Verification failed for %s.", definition.__name__)
        return 1
    return 0


def command_steady(args: argparse.Namespace, config: RunConfig) -> int:
    grid = config.grid.build()
    params = SteadyStateParams(c=args.c, a=args.a)
    omega = mobius_omega(params, grid)
    if args.rapidity != 0.0:
        omega = boost_cross_section(omega, BoostSpec(rapidity=args.rapidity, axis=args.axis))

    directory = config.output.directory
    directory.mkdir(parents=True, exist_ok=True)
    write_snapshot(directory / snapshot_name(0), 0.0, omega.values)
    report = _new_report(
        "steady",
        config,
        summary={"c": params.c, "a": list(params.a), "rapidity": args.rapidity, "axis": list(args.axis)},
        fit=_fit_summary(omega),
    )
    write_report(directory / "report.json", report)
    return 0


def command_fit(args: argparse.Namespace, config: RunConfig) -> int:
    if args.path.is_dir():
        stored = load_trajectory(args.path)
        grid = stored.grid
        if grid is None or not stored.snapshots:
            raise InsufficientDataError(f"{args.path} holds no snapshots with a known grid.")
        snapshot = stored.snapshots[-1]
        omega = ConformalFactor(grid, snapshot.values)
    else:
        omega = _snapshot_factor(args.path, config.grid.build())

    fit = _fit_summary(omega)
    summary = {} if fit is None else fit.model_dump()
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out is not None:
        write_outputs(config.output.directory, _new_report("fit", config, fit=fit))
    return 0


def summarize_diagnostics(frame: pd.DataFrame) -> Dict[str, Any]:
    """
    Headline numbers of a ``diagnostics.csv`` frame.

    Decay slopes of ``max|Å|²`` are fitted over the final two thirds of the
    records when it stays positive.
    """
    summary: Dict[str, Any] = {
        "records": int(len(frame)),
        "t_initial": float(frame["t"].iloc[0]),
        "t_final": float(frame["t"].iloc[-1]),
        "vol_initial": float(frame["vol"].iloc[0]),
        "vol_final": float(frame["vol"].iloc[-1]),
        "h2_ratio_final": float(frame["h2_max"].iloc[-1] / frame["h2_min"].iloc[-1]),
        "a_ring_sq_max_final": float(frame["a_ring_sq_max"].iloc[-1]),
    }
    monotone = {}
    for column in frame.columns:
        if column.startswith("f_sigma_"):
            values = frame[column].to_numpy()
            monotone[column] = bool(np.all(np.diff(values[np.isfinite(values)]) <= 0.0))
    summary["f_sigma_nonincreasing"] = monotone

    values = frame["a_ring_sq_max"].to_numpy()
    start = len(frame) // 3
    if len(frame) - start >= 3 and np.all(values[start:] > 0.0):
        summary["a_ring_sq_decay"] = fit_decay(frame["t"].to_numpy()[start:], values[start:])
    return summary


def command_report(args: argparse.Namespace, config: RunConfig) -> int:
    stored = load_trajectory(args.directory)
    summary: Dict[str, Any] = {"command": stored.report.command}
    if stored.diagnostics is not None and len(stored.diagnostics):
        summary.update(summarize_diagnostics(stored.diagnostics))
    summary["snapshots"] = len(stored.snapshots)
    summary["checks"] = {report.name: report.passed for report in stored.report.reports}
    if stored.report.suite is not None:
        summary["suite_passed"] = stored.report.suite.passed

    grid = stored.grid
    fit = None
    if grid is not None and stored.snapshots:
        fit = _fit_summary(ConformalFactor(grid, stored.snapshots[-1].values))
        summary["fit"] = None if fit is None else fit.model_dump()

    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    if args.out is not None:
        write_outputs(
            config.output.directory, _new_report("report", config, summary=summary, fit=fit)
        )
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "run": command_run,
    "verify": command_verify,
    "steady": command_steady,
    "fit": command_fit,
    "report": command_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``lcflow`` command.

    :param argv: Arguments, ``sys.argv[1:]`` by default.
    :type argv: Optional[Sequence[str]]
    :return: Exit status.
    :rtype: int
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return ex.code if isinstance(ex.code, int) else 2

    _configure_logging(args.verbose)
    try:
        config = _load(args)
        logger.info("Running %s.", args.command)
        return COMMANDS[args.command](args, config)
    except ValidationError as ex:
        logger.error("%s: invalid arguments.\n%s", args.command, ex)
        return 2
    except (LightconeFlowError, OSError) as ex:
        logger.error(
            "%s failed: %s", args.command, ex, exc_info=True, stack_info=True
        )
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

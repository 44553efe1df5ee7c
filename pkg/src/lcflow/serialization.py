"""
Serialization module.

Output files of a run directory:

- ``diagnostics.csv``: one header row, then one row per diagnostics record.
- ``omega_<index>.f64``: one conformal factor snapshot each, a 32 byte header
  (magic ``LCFLOW01``, ``u32 N_θ``, ``u32 N_φ``, ``f64 t``, 8 pad bytes)
  followed by ``N_θ N_φ`` little-endian doubles in row-major ``[i][j]`` order.
- ``report.json``: run metadata, residual reports, fits and slopes.

Every file is written to a temporary sibling, read back and checked, then
moved into place with :func:`os.replace`.
"""

import logging
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field as PydanticField, ValidationError

from .errors import OutputIntegrityError, SnapshotFormatError
from .flow import DiagnosticsRecord, Snapshot, TrajectoryLog, TrajectoryMetadata
from .spectral import SphereGrid
from .suite import SuiteResult
from .types import Field
from .verification import ResidualReport

logger = logging.getLogger(__name__)

DIAGNOSTICS_FILE = "diagnostics.csv"
REPORT_FILE = "report.json"
SNAPSHOT_MAGIC = b"LCFLOW01"
SNAPSHOT_HEADER = np.dtype(
    [
        ("magic", "S8"),
        ("n_theta", "<u4"),
        ("n_phi", "<u4"),
        ("t", "<f8"),
        ("pad", "V8"),
    ]
)
_SNAPSHOT_NAME = re.compile(r"^omega_(\d+)\.f64$")
_FLOAT_FORMAT = "%.17g"

LEADING_COLUMNS = ("t", "vol", "h2_min", "h2_max", "r_min", "r_max", "a_ring_sq_max")
TRAILING_COLUMNS = (
    "grad_h2_sq_max",
    "psi",
    "gauss_residual",
    "diam_lo",
    "diam_hi",
    "grad_ineq_slack",
)


def sigma_column(sigma: float) -> str:
    """Column name of ``max f_σ``, for example ``f_sigma_0.5``."""
    return f"f_sigma_{sigma:g}"


def diagnostics_columns(sigmas: Sequence[float]) -> List[str]:
    """The ``diagnostics.csv`` header for the given exponents."""
    return [*LEADING_COLUMNS, *(sigma_column(s) for s in sigmas), *TRAILING_COLUMNS]


def snapshot_name(index: int) -> str:
    return f"omega_{index}.f64"


class FitSummary(BaseModel):
    """Constant curvature fit of a cross section."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    c: float
    a: List[float]
    residual: float


class RunReport(BaseModel):
    """
    Content of ``report.json``.

    :ivar command: Subcommand that produced the report.
    :type command: str
    :ivar version: ``lcflow`` version.
    :type version: str
    :ivar identifier: Run identifier; fixed for deterministic runs.
    :type identifier: str
    :ivar created: ISO timestamp, omitted for deterministic runs.
    :type created: Optional[str]
    :ivar config: The run configuration.
    :type config: Dict[str, Any]
    :ivar metadata: Trajectory metadata of flow runs.
    :type metadata: Optional[TrajectoryMetadata]
    :ivar summary: Headline numbers.
    :type summary: Dict[str, Any]
    :ivar reports: Residual reports of trajectory checks.
    :type reports: List[ResidualReport]
    :ivar suite: Result of the single cross-section suite.
    :type suite: Optional[SuiteResult]
    :ivar fit: Constant curvature fit.
    :type fit: Optional[FitSummary]
    :ivar slopes: Fitted decay slopes, keyed by quantity.
    :type slopes: Dict[str, Optional[float]]
    """

    model_config = ConfigDict(ser_json_inf_nan="constants")

    command: str
    version: str
    identifier: str
    created: Optional[str] = None
    config: Dict[str, Any] = PydanticField(default_factory=dict)
    metadata: Optional[TrajectoryMetadata] = None
    summary: Dict[str, Any] = PydanticField(default_factory=dict)
    reports: List[ResidualReport] = PydanticField(default_factory=list)
    suite: Optional[SuiteResult] = None
    fit: Optional[FitSummary] = None
    slopes: Dict[str, Optional[float]] = PydanticField(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Every report and the suite passed."""
        suite_passed = self.suite is None or self.suite.passed
        return suite_passed and all(report.passed for report in self.reports)


def _atomic_write(path: Path, data: bytes, check: Callable[[bytes], None]) -> Path:
    temporary = path.with_name(f".{path.name}.tmp")
    try:
        with open(temporary, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        written = temporary.read_bytes()
        if written != data:
            raise OutputIntegrityError(
                f"{path.name}: read back {len(written)} bytes, expected {len(data)}."
            )
        check(written)
        os.replace(temporary, path)
    finally:
        if temporary.exists():
            temporary.unlink()
    logger.debug("Wrote %s (%d bytes).", path, len(data))
    return path


def _check_text(lines: Optional[int] = None) -> Callable[[bytes], None]:
    def check(data: bytes) -> None:
        if not data.endswith(b"\n"):
            raise OutputIntegrityError("missing terminal newline")
        found = data.count(b"\n")
        if lines is not None and found != lines:
            raise OutputIntegrityError(f"expected {lines} lines, found {found}")

    return check


def diagnostics_frame(records: Sequence[DiagnosticsRecord]) -> pd.DataFrame:
    """
    Diagnostics records as a frame with the ``diagnostics.csv`` columns.

    Undefined values (``None``) become ``nan``.
    """
    sigmas = records[0].sigmas if records else ()
    rows = []
    for record in records:
        row: Dict[str, Any] = {name: getattr(record, name) for name in LEADING_COLUMNS}
        for sigma, value in zip(record.sigmas, record.f_sigma):
            row[sigma_column(sigma)] = math.nan if value is None else value
        for name in TRAILING_COLUMNS:
            value = getattr(record, name)
            row[name] = math.nan if value is None else value
        rows.append(row)
    return pd.DataFrame(rows, columns=diagnostics_columns(sigmas), dtype=np.float64)


def write_diagnostics(path: Union[str, Path], records: Sequence[DiagnosticsRecord]) -> Path:
    """
    Write ``diagnostics.csv``.

    :raises OutputIntegrityError: If the written file fails its check.
    """
    text = diagnostics_frame(records).to_csv(
        index=False,
        float_format=_FLOAT_FORMAT,
        na_rep="nan",
        lineterminator="\n",
    )
    return _atomic_write(Path(path), text.encode("utf-8"), _check_text(len(records) + 1))


def read_diagnostics(path: Union[str, Path]) -> pd.DataFrame:
    """
    Read ``diagnostics.csv``.

    :raises SnapshotFormatError: If required columns are missing.
    """
    frame = pd.read_csv(path, na_values=["nan"])
    missing = [name for name in (*LEADING_COLUMNS, *TRAILING_COLUMNS) if name not in frame]
    if missing:
        raise SnapshotFormatError(f"{path}: missing columns {', '.join(missing)}")
    return frame


def encode_snapshot(t: float, values: Field) -> bytes:
    """Header and payload of a snapshot file."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise SnapshotFormatError(f"Snapshot must be two dimensional, got shape {values.shape}.")
    header = np.zeros(1, dtype=SNAPSHOT_HEADER)
    header["magic"] = SNAPSHOT_MAGIC
    header["n_theta"] = values.shape[0]
    header["n_phi"] = values.shape[1]
    header["t"] = t
    payload = np.ascontiguousarray(values, dtype="<f8")
    return header.tobytes() + payload.tobytes()


def write_snapshot(path: Union[str, Path], t: float, values: Field) -> Path:
    """
    Write one snapshot file.

    :raises OutputIntegrityError: If the written file has the wrong size.
    """
    data = encode_snapshot(t, values)
    expected = SNAPSHOT_HEADER.itemsize + 8 * int(np.asarray(values).size)

    def check(written: bytes) -> None:
        if len(written) != expected:
            raise OutputIntegrityError(f"expected {expected} bytes, wrote {len(written)}")

    return _atomic_write(Path(path), data, check)


def read_snapshot(path: Union[str, Path]) -> Snapshot:
    """
    Read one snapshot file.

    The index is taken from an ``omega_<index>.f64`` file name, 0 otherwise.

    :raises SnapshotFormatError: On a bad magic string or a size mismatch.
    :rtype: Snapshot
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < SNAPSHOT_HEADER.itemsize:
        raise SnapshotFormatError(f"{path}: truncated header ({len(data)} bytes).")
    header = np.frombuffer(data, dtype=SNAPSHOT_HEADER, count=1)[0]
    if bytes(header["magic"]) != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {bytes(header['magic'])!r}.")
    n_theta, n_phi = int(header["n_theta"]), int(header["n_phi"])
    expected = SNAPSHOT_HEADER.itemsize + 8 * n_theta * n_phi
    if len(data) != expected:
        raise SnapshotFormatError(
            f"{path}: {len(data)} bytes, header describes {expected}."
        )
    values = np.frombuffer(data, dtype="<f8", offset=SNAPSHOT_HEADER.itemsize)
    match = _SNAPSHOT_NAME.match(path.name)
    return Snapshot(
        index=int(match.group(1)) if match else 0,
        t=float(header["t"]),
        values=values.reshape(n_theta, n_phi).astype(np.float64),
    )


def write_report(path: Union[str, Path], report: RunReport) -> Path:
    """Write ``report.json``, with check outcomes under the key ``pass``."""
    text = report.model_dump_json(by_alias=True, indent=2) + "\n"
    return _atomic_write(Path(path), text.encode("utf-8"), _check_text())


def read_report(path: Union[str, Path]) -> RunReport:
    """
    Read ``report.json``.

    :raises SnapshotFormatError: If the file does not validate.
    """
    try:
        return RunReport.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as ex:
        raise SnapshotFormatError(f"{path}: invalid report: {ex}") from ex


def write_outputs(
    directory: Union[str, Path],
    report: RunReport,
    traj: Optional[TrajectoryLog] = None,
    csv: bool = True,
    snapshots: bool = True,
) -> List[Path]:
    """
    Write the files of a run directory.

    :param directory: Output directory, created when missing.
    :type directory: Union[str, Path]
    :param report: Content of ``report.json``.
    :type report: RunReport
    :param traj: Trajectory whose diagnostics and snapshots are written.
    :type traj: Optional[TrajectoryLog]
    :param csv: Whether to write ``diagnostics.csv``.
    :type csv: bool
    :param snapshots: Whether to write snapshot files.
    :type snapshots: bool
    :return: The written paths.
    :rtype: List[Path]
    :raises OutputIntegrityError: If a file fails its read-back check.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    if traj is not None:
        if csv:
            written.append(write_diagnostics(directory / DIAGNOSTICS_FILE, traj.records))
        if snapshots:
            for snapshot in traj.snapshots:
                written.append(
                    write_snapshot(
                        directory / snapshot_name(snapshot.index), snapshot.t, snapshot.values
                    )
                )
    written.append(write_report(directory / REPORT_FILE, report))
    logger.info("Wrote %d file(s) to %s.", len(written), directory)
    return written


@dataclass
class StoredTrajectory:
    """
    A run directory read back from disk.

    :ivar directory: The run directory.
    :vartype directory: Path
    :ivar report: Content of ``report.json``.
    :vartype report: RunReport
    :ivar diagnostics: Content of ``diagnostics.csv``, when present.
    :vartype diagnostics: Optional[pd.DataFrame]
    :ivar snapshots: Snapshots sorted by index.
    :vartype snapshots: List[Snapshot]
    """

    directory: Path
    report: RunReport
    diagnostics: Optional[pd.DataFrame] = None
    snapshots: List[Snapshot] = field(default_factory=list)

    @property
    def grid(self) -> Optional[SphereGrid]:
        """Grid of the run, when the report carries trajectory metadata."""
        metadata = self.report.metadata
        if metadata is None:
            return None
        return SphereGrid(metadata.L, metadata.oversample)


def load_trajectory(directory: Union[str, Path]) -> StoredTrajectory:
    """
    Read a run directory written by :func:`write_outputs`.

    :raises SnapshotFormatError: If a file is malformed.
    :raises FileNotFoundError: If ``report.json`` is missing.
    :rtype: StoredTrajectory
    """
    directory = Path(directory)
    report = read_report(directory / REPORT_FILE)
    csv_path = directory / DIAGNOSTICS_FILE
    diagnostics = read_diagnostics(csv_path) if csv_path.exists() else None
    paths = sorted(
        (path for path in directory.iterdir() if _SNAPSHOT_NAME.match(path.name)),
        key=lambda path: int(_SNAPSHOT_NAME.match(path.name).group(1)),  # type: ignore[union-attr]
    )
    snapshots = [read_snapshot(path) for path in paths]
    logger.debug(
        "Loaded %s with %d snapshot(s).", directory, len(snapshots)
    )
    return StoredTrajectory(
        directory=directory, report=report, diagnostics=diagnostics, snapshots=snapshots
    )

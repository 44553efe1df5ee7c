"""
Errors module.
"""

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .flow import FlowState


class LightconeFlowError(Exception):
    """Base class for all errors raised by ``lcflow``.

    Catching this exception is enough to handle every domain failure, for example
    in the command line driver, which maps it to a non-zero exit status.
    """


class NonPositiveFactorError(LightconeFlowError, ValueError):
    """Raised when a conformal factor is zero, negative or non-finite at some node.

    A cross section of the lightcone is a graph ``r = ω(x)`` over the sphere, so
    every quantity derived from ``ω`` requires ``ω > 0`` everywhere.
    """


class GridError(LightconeFlowError, ValueError):
    """Raised when a sphere grid is requested with invalid parameters, or when a
    field does not match the shape of the grid it is used with."""


class BandlimitError(LightconeFlowError, ValueError):
    """Raised when harmonic coefficients carry a higher bandlimit than the grid can
    resolve."""


class FrameConditioningError(LightconeFlowError):
    """Raised when the per-node linear system for the null frame is too badly
    conditioned to be trusted.

    This cannot happen for a spacelike graph over the sphere, so the error points
    to corrupted input (for example a non-finite tangent vector).
    """


class StiffFailureError(LightconeFlowError):
    """Raised when the adaptive integrator would need a step below ``dt_min``.

    :ivar state: The last accepted flow state.
    :type state: FlowState
    """

    def __init__(self, message: str, state: Optional["FlowState"] = None):
        super().__init__(message)
        self.state = state


class PositivityLossError(LightconeFlowError):
    """Raised when the conformal factor loses positivity in a way that cannot be
    recovered by rejecting the step: halving keeps leaving the positive cone until
    the step falls below ``dt_min``.

    :ivar state: The last accepted flow state.
    :type state: FlowState
    """

    def __init__(self, message: str, state: Optional["FlowState"] = None):
        super().__init__(message)
        self.state = state


class FlowConsistencyError(LightconeFlowError):
    """Raised when an internal consistency assertion of the flow fails, for example
    volume drift of the normalized flow or non-increasing record times."""


class TrajectoryTooSparseError(LightconeFlowError):
    """Raised when a trajectory has too few records for stable quadrature."""


class InsufficientDataError(LightconeFlowError):
    """Raised when a trajectory check has too few records or snapshots to decide,
    or when the snapshot stride is not uniform."""


class SteadyStateFitError(LightconeFlowError):
    """Raised when the affine part of ``1/ω`` does not describe a timelike boost,
    so no member of the constant curvature family can be reconstructed."""


class InitialDataError(LightconeFlowError):
    """Raised when admissible initial data cannot be produced, for example when
    random sampling never yields strictly positive curvature."""


class ConfigError(LightconeFlowError, ValueError):
    """Raised when configuration text cannot be parsed or fails validation.

    :ivar line: The 1-based line number of the offending line, when known.
    :type line: Optional[int]
    :ivar key: The dotted configuration key, when known.
    :type key: Optional[str]
    """

    def __init__(
        self, message: str, line: Optional[int] = None, key: Optional[str] = None
    ):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key


class OutputIntegrityError(LightconeFlowError, OSError):
    """Raised when a written output file fails its read-back integrity check
    (missing terminal newline, wrong size or wrong line count)."""


class SnapshotFormatError(LightconeFlowError, ValueError):
    """Raised when a snapshot file has a bad magic string, a truncated payload or a
    header that does not match its size."""


class CancelSuiteError(LightconeFlowError):
    """Raised by a check to cancel the rest of a verification suite.

    Checks that already completed keep their reports; no further checks are run
    and the suite's ``on_cancelled`` hook is called.
    """

"""
lcflow: null mean curvature flow of lightcone cross sections.

A cross section of the future lightcone of the origin in Minkowski space is the
graph ``r = ω(x)`` over the unit sphere, with induced metric ``ω² g₀``. The
package evolves ``ω`` by the null mean curvature flow, which is two dimensional
Ricci flow on the cross sections, and verifies the geometric identities and
estimates along the way.

This module exposes the primary public API of the package.
"""

from importlib.metadata import PackageNotFoundError, version

from .builder import SuiteBuilder
from .config import RunConfig, parse_config
from .context import SuiteContext
from .decorators import check
from .flow import FlowMode, FlowOptions, TrajectoryLog, renormalize_trajectory, run_flow
from .geometry import ConformalFactor, lightcone_quantities, null_frame
from .initial import InitialKind, InitialSpec, initial_omega
from .spectral import SphereGrid
from .steady import BoostSpec, SteadyStateParams, fit_constant_curvature, mobius_omega
from .suite import ExecutionMode, StandardSuite, SuiteDefinition
from .verification import ResidualReport, Tolerances

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    __version__ = "0.0.0.dev"

__all__ = (
    "BoostSpec",
    "ConformalFactor",
    "ExecutionMode",
    "FlowMode",
    "FlowOptions",
    "InitialKind",
    "InitialSpec",
    "ResidualReport",
    "RunConfig",
    "SphereGrid",
    "StandardSuite",
    "SteadyStateParams",
    "SuiteBuilder",
    "SuiteContext",
    "SuiteDefinition",
    "Tolerances",
    "TrajectoryLog",
    "check",
    "fit_constant_curvature",
    "initial_omega",
    "lightcone_quantities",
    "mobius_omega",
    "null_frame",
    "parse_config",
    "renormalize_trajectory",
    "run_flow",
    "__version__",
)

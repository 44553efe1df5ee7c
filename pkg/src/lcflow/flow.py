"""
Flow engine module.

Integrates null mean curvature flow ``∂_t ω = -θ/2`` of lightcone cross
sections, which is two dimensional Ricci flow in the conformal class of the
round sphere, and its volume preserving renormalization
``∂_t ω = (r - R) ω / 2`` with ``r`` the mean scalar curvature.

Time stepping uses the embedded Cash-Karp Runge-Kutta pair of orders 4 and 5
in physical space, with every stage re-projected onto the state bandlimit.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field as PydanticField,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)
from scipy.interpolate import CubicSpline

from .calculus import covariant_grad_sym2, gamma_norm2
from .errors import (
    FlowConsistencyError,
    NonPositiveFactorError,
    PositivityLossError,
    StiffFailureError,
    TrajectoryTooSparseError,
)
from .geometry import (
    ConformalFactor,
    diameter_bounds,
    intrinsic_scalar_curvature,
    lightcone_quantities,
    null_expansion,
)
from .spectral import SphereGrid
from .types import Field, SigmaList

logger = logging.getLogger(__name__)

# Cash-Karp tableau; the right-hand side is autonomous so stage times are unused
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0),
    (-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0),
    (1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0),
)
_B5 = (37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0)
_ERR = (
    -277.0 / 64512.0,
    0.0,
    6925.0 / 370944.0,
    -6925.0 / 202752.0,
    -277.0 / 14336.0,
    277.0 / 7084.0,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_TIME_EPSILON = 1e-12
_MIN_RECORDS_FOR_QUADRATURE = 4


class FlowMode(str, enum.Enum):
    """Which flow to integrate."""

    UNNORMALIZED = "unnormalized"
    """``∂_t ω = -θ/2``; the cross section shrinks into the tip of the cone."""

    NORMALIZED = "normalized"
    """``∂_t ω = (r - R) ω / 2``; area is preserved."""


class StopCriterion(str, enum.Enum):
    """When to stop a run."""

    EXTINCTION = "extinction"
    """``min ω < extinction_epsilon``."""

    CONVERGENCE = "convergence"
    """``max |Å|² < convergence_epsilon``."""

    T_FINAL = "t_final"
    """``t = t_final``."""


class FlowOptions(BaseModel):
    """
    Options of a flow run.

    :ivar mode: Unnormalized or normalized flow.
    :type mode: FlowMode
    :ivar rk_tolerance: Bound on the estimated local error per step (max norm).
    :type rk_tolerance: float
    :ivar dt_initial: First trial step.
    :type dt_initial: float
    :ivar dt_min: Smallest step the controller may choose.
    :type dt_min: float
    :ivar dt_max: Largest step the controller may choose.
    :type dt_max: float
    :ivar stop: Stop criterion.
    :type stop: StopCriterion
    :ivar extinction_epsilon: Threshold on ``min ω`` for extinction.
    :type extinction_epsilon: float
    :ivar convergence_epsilon: Threshold on ``max |Å|²`` for convergence.
    :type convergence_epsilon: float
    :ivar t_final: Final time, required by the ``t_final`` criterion.
    :type t_final: Optional[float]
    :ivar snapshot_every: Snapshot stride in flow time, or ``None`` for no
        snapshots besides the initial one.
    :type snapshot_every: Optional[float]
    :ivar max_steps: Cap on accepted steps.
    :type max_steps: int
    :ivar sigmas: Exponents of the pinching quantities ``f_σ``.
    :type sigmas: SigmaList
    :ivar psi_weight: Weight ``K₀`` of ``|Å|²`` in ``Ψ``.
    :type psi_weight: float
    :ivar volume_drift_tolerance: Allowed relative area drift per unit time of the
        normalized flow.
    :type volume_drift_tolerance: float
    :ivar consistency_tolerance: Allowed relative disagreement of ``-θ/2`` and
        ``-ωK`` in the unnormalized flow, asserted at the initial state and at
        every record.
    :type consistency_tolerance: float
    :ivar seed: Seed of random initial data, recorded with the run.
    :type seed: Optional[int]
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: FlowMode = FlowMode.UNNORMALIZED
    rk_tolerance: PositiveFloat = 1e-9
    dt_initial: PositiveFloat = 1e-4
    dt_min: PositiveFloat = 1e-12
    dt_max: PositiveFloat = 1e-2
    stop: StopCriterion = StopCriterion.EXTINCTION
    extinction_epsilon: PositiveFloat = 1e-3
    convergence_epsilon: PositiveFloat = 1e-9
    t_final: Optional[PositiveFloat] = None
    snapshot_every: Optional[PositiveFloat] = None
    max_steps: PositiveInt = 100_000
    sigmas: SigmaList = (0.0, 0.5, 1.0)
    psi_weight: float = PydanticField(default=1.0, ge=0.0, allow_inf_nan=False)
    volume_drift_tolerance: PositiveFloat = 1e-8
    consistency_tolerance: PositiveFloat = 1e-9
    seed: Optional[int] = None

    @field_validator("sigmas")
    @classmethod
    def _sigmas_in_unit_interval(cls, value: SigmaList) -> SigmaList:
        if not all(0.0 <= sigma <= 1.0 for sigma in value):
            raise ValueError("every sigma must lie in [0, 1]")
        return value

    @model_validator(mode="after")
    def _consistent_steps(self) -> "FlowOptions":
        if self.dt_min > self.dt_max:
            raise ValueError("dt_min must not exceed dt_max")
        if self.stop is StopCriterion.T_FINAL and self.t_final is None:
            raise ValueError("t_final is required by the t_final stop criterion")
        return self


@dataclass
class FlowState:
    """
    A point of a flow trajectory.

    :ivar t: Flow time.
    :vartype t: float
    :ivar omega: Conformal factor at time ``t``.
    :vartype omega: ConformalFactor
    :ivar dt: Step size proposed for the next step.
    :vartype dt: Optional[float]
    :ivar rejected: Rejected trial steps before this state was accepted.
    :vartype rejected: int
    """

    t: float
    omega: ConformalFactor
    dt: Optional[float] = None
    rejected: int = 0


class DiagnosticsRecord(BaseModel):
    """
    Scalar diagnostics of one cross section.

    Quantities that divide by ``H²`` (``f_σ``, ``Ψ`` and ``|A|²/(H²)²``) are
    ``None`` when some node has ``H² ≤ 0``, which ``h2_nonpositive`` flags.
    """

    model_config = ConfigDict(frozen=True)

    t: float
    vol: float
    h2_min: float
    h2_max: float
    r_min: float
    r_max: float
    a_ring_sq_max: float
    sigmas: SigmaList
    f_sigma: Tuple[Optional[float], ...]
    grad_h2_sq_max: float
    psi: Optional[float]
    gauss_residual: float
    diam_lo: float
    diam_hi: float
    grad_ineq_slack: float
    omega_min: float
    omega_max: float
    r_mean: float
    a_h2_ratio_max: Optional[float]
    h2_norm_k2: float
    h2_norm_k3: float
    h2_nonpositive: bool

    def rescaled(self, c: float, t: float) -> "DiagnosticsRecord":
        """
        The record of the metric ``c γ`` at time ``t``.

        Each field scales with the power of ``c`` fixed by its degree.
        """

        def power(value: Optional[float], exponent: float) -> Optional[float]:
            return None if value is None else value * c**exponent

        root = math.sqrt(c)
        return self.model_copy(
            update={
                "t": t,
                "vol": self.vol * c,
                "h2_min": self.h2_min / c,
                "h2_max": self.h2_max / c,
                "r_min": self.r_min / c,
                "r_max": self.r_max / c,
                "a_ring_sq_max": self.a_ring_sq_max / c**2,
                "f_sigma": tuple(
                    power(value, -sigma) for value, sigma in zip(self.f_sigma, self.sigmas)
                ),
                "grad_h2_sq_max": self.grad_h2_sq_max / c**3,
                "psi": power(self.psi, -2.0),
                "gauss_residual": self.gauss_residual / c,
                "diam_lo": self.diam_lo * root,
                "diam_hi": self.diam_hi * root,
                "grad_ineq_slack": self.grad_ineq_slack / c**3,
                "omega_min": self.omega_min * root,
                "omega_max": self.omega_max * root,
                "r_mean": self.r_mean / c,
                "h2_norm_k2": self.h2_norm_k2 / c**2,
                "h2_norm_k3": self.h2_norm_k3 / c**2,
            }
        )


@dataclass
class Snapshot:
    """A sampled conformal factor at a recorded time."""

    index: int
    t: float
    values: Field


class TrajectoryMetadata(BaseModel):
    """
    Run metadata of a trajectory.

    :ivar L: State bandlimit of the grid.
    :type L: int
    :ivar oversample: Oversampling factor of the grid.
    :type oversample: float
    :ivar options: The flow options.
    :type options: FlowOptions
    :ivar stop_reason: Why the run stopped.
    :type stop_reason: Optional[str]
    :ivar steps: Accepted steps.
    :type steps: int
    :ivar rejected_steps: Rejected trial steps.
    :type rejected_steps: int
    :ivar extinction_estimate: ``t + Vol / (8π)`` at the last record of an
        unnormalized run, exact for that flow.
    :type extinction_estimate: Optional[float]
    :ivar renormalized: Whether the trajectory was produced by renormalization.
    :type renormalized: bool
    """

    L: int
    oversample: float
    options: FlowOptions
    stop_reason: Optional[str] = None
    steps: int = 0
    rejected_steps: int = 0
    extinction_estimate: Optional[float] = None
    renormalized: bool = False


@dataclass
class TrajectoryLog:
    """
    Diagnostics records and snapshots of a run, in increasing time.

    :ivar grid: The quadrature grid of the run.
    :vartype grid: SphereGrid
    :ivar metadata: Run metadata.
    :vartype metadata: TrajectoryMetadata
    :ivar records: One record per accepted step, plus the initial one.
    :vartype records: List[DiagnosticsRecord]
    :ivar snapshots: Snapshots on the configured stride.
    :vartype snapshots: List[Snapshot]
    """

    grid: SphereGrid
    metadata: TrajectoryMetadata
    records: List[DiagnosticsRecord] = field(default_factory=list)
    snapshots: List[Snapshot] = field(default_factory=list)

    def append(self, record: DiagnosticsRecord) -> None:
        """Append a record, enforcing strictly increasing times."""
        if self.records and record.t <= self.records[-1].t:
            raise FlowConsistencyError(
                f"Record time {record.t!r} does not follow {self.records[-1].t!r}."
            )
        self.records.append(record)

    def add_snapshot(self, t: float, values: Field) -> Snapshot:
        """Store a copy of ``values`` as the next snapshot."""
        if self.snapshots and t <= self.snapshots[-1].t:
            raise FlowConsistencyError(
                f"Snapshot time {t!r} does not follow {self.snapshots[-1].t!r}."
            )
        snapshot = Snapshot(index=len(self.snapshots), t=t, values=np.array(values, copy=True))
        self.snapshots.append(snapshot)
        return snapshot

    @property
    def times(self) -> np.ndarray:
        return np.array([record.t for record in self.records])

    def column(self, name: str) -> np.ndarray:
        """Values of one scalar record field over the trajectory."""
        return np.array([getattr(record, name) for record in self.records], dtype=np.float64)

    def f_sigma_column(self, sigma: float) -> np.ndarray:
        """``max f_σ`` over the trajectory, ``nan`` where it is undefined."""
        columns = []
        for record in self.records:
            values = dict(zip(record.sigmas, record.f_sigma))
            value = values.get(sigma)
            columns.append(np.nan if value is None else value)
        return np.array(columns, dtype=np.float64)

    def conformal_factor(self, snapshot: Snapshot) -> ConformalFactor:
        return ConformalFactor(self.grid, snapshot.values)


def rhs(
    omega: ConformalFactor,
    mode: FlowMode,
    check: bool = False,
    tolerance: float = 1e-9,
) -> Field:
    """
    Right-hand side of the flow.

    ``-θ/2 = ω⁻²Δ₀ω - 1/ω - ω⁻³|∇ω|²₀`` for the unnormalized flow and
    ``(r - R) ω / 2`` for the normalized flow, where ``R = θ/ω`` and ``r`` is the
    quadrature mean of ``R`` against ``dμ = ω² dΩ`` (``8π / Vol`` by Gauss-Bonnet).

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param mode: Which flow.
    :type mode: FlowMode
    :param check: Also compare the unnormalized value with ``-ωK`` computed from
        the intrinsic curvature.
    :type check: bool
    :param tolerance: Allowed deviation of the check, relative to
        ``1 + max |-θ/2|``.
    :type tolerance: float
    :raises FlowConsistencyError: If the check fails.
    :rtype: Field
    """
    w = omega.values
    theta = null_expansion(omega)
    if mode is FlowMode.UNNORMALIZED:
        value = -0.5 * theta
        if check:
            oracle = -0.5 * w * intrinsic_scalar_curvature(omega)
            scale = 1.0 + float(np.max(np.abs(value)))
            deviation = float(np.max(np.abs(value - oracle)))
            if deviation > tolerance * scale:
                raise FlowConsistencyError(
                    f"-θ/2 and -ωK disagree by {deviation:.3g} (scale {scale:.3g})."
                )
        return value
    curvature = theta / w
    mean = omega.grid.mean(curvature, weight=w**2)
    return 0.5 * (mean - curvature) * w


def _stage(grid: SphereGrid, values: Field, mode: FlowMode) -> Field:
    return grid.project(rhs(ConformalFactor(grid, values), mode))


def _cash_karp(state: FlowState, dt: float, mode: FlowMode) -> Tuple[Field, float]:
    """One trial step; returns the fifth order solution and the error estimate."""
    grid = state.omega.grid
    y = state.omega.values
    stages: List[Field] = []
    for row in _A:
        increment = sum((a * k for a, k in zip(row, stages)), np.zeros_like(y))
        stages.append(_stage(grid, y + dt * increment, mode))
    solution = y + dt * sum(b * k for b, k in zip(_B5, stages))
    error = dt * sum(e * k for e, k in zip(_ERR, stages))
    return solution, float(np.max(np.abs(error)))


def step_fixed(state: FlowState, dt: float, mode: FlowMode) -> FlowState:
    """
    One fifth order step of size ``dt`` without error control.

    :raises NonPositiveFactorError: If a stage leaves the positive cone.
    """
    solution, _ = _cash_karp(state, dt, mode)
    return FlowState(t=state.t + dt, omega=ConformalFactor(state.omega.grid, solution), dt=dt)


def step_adaptive(
    state: FlowState, opts: FlowOptions, dt_limit: Optional[float] = None
) -> FlowState:
    """
    One accepted adaptive step.

    Trial steps whose error estimate exceeds ``rk_tolerance`` are retried with a
    smaller step; steps that would bring ``min ω`` below half the extinction
    threshold (or out of the positive cone) are halved. The proposed next step
    ``0.9 (tol/err)^{1/5} dt`` is clamped to ``[dt_min, dt_max]``.

    :param state: Current state.
    :type state: FlowState
    :param opts: Flow options.
    :type opts: FlowOptions
    :param dt_limit: Largest step allowed, used to land on output times; may be
        smaller than ``dt_min``, in which case the step may still be cut back by
        the smallest controller factor before it counts as an underflow.
    :type dt_limit: Optional[float]
    :raises StiffFailureError: If the error control would take the step below
        ``dt_min``.
    :raises PositivityLossError: If halving for positivity would take the step
        below ``dt_min``.
    :rtype: FlowState
    """
    dt = min(state.dt or opts.dt_initial, opts.dt_max)
    limited = dt_limit is not None and dt_limit <= dt
    if limited:
        dt = dt_limit  # type: ignore[assignment]
    smallest = min(opts.dt_min, _MIN_FACTOR * dt) if limited else opts.dt_min
    floor = 0.5 * opts.extinction_epsilon
    rejected = 0

    while True:
        try:
            solution, error = _cash_karp(state, dt, opts.mode)
            admissible = float(np.min(solution)) >= floor
        except NonPositiveFactorError:
            admissible, error = False, math.inf

        if admissible and error <= opts.rk_tolerance:
            factor = _MAX_FACTOR if error == 0.0 else _SAFETY * (opts.rk_tolerance / error) ** 0.2
            proposed = dt * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            proposed = min(opts.dt_max, max(opts.dt_min, proposed))
            t = state.t + dt
            logger.debug("Accepted step t=%.12g dt=%.3g err=%.3g.", t, dt, error)
            return FlowState(
                t=t,
                omega=ConformalFactor(state.omega.grid, solution),
                dt=proposed,
                rejected=rejected,
            )

        rejected += 1
        if admissible:
            shrink = max(_MIN_FACTOR, _SAFETY * (opts.rk_tolerance / error) ** 0.25)
        else:
            shrink = 0.5
        logger.debug("Rejected step t=%.12g dt=%.3g err=%.3g.", state.t, dt, error)
        dt *= shrink
        if dt < smallest:
            if not admissible:
                raise PositivityLossError(
                    f"min ω stays below {floor:.3g} for every step down to {dt:.3g} "
                    f"at t={state.t:.12g}.",
                    state=state,
                )
            raise StiffFailureError(
                f"Step size {dt:.3g} fell below dt_min={opts.dt_min:g} at t={state.t:.12g}.",
                state=state,
            )


def diagnostics(
    omega: ConformalFactor,
    sigmas: SigmaList = (0.0, 0.5, 1.0),
    t: float = 0.0,
    psi_weight: float = 1.0,
) -> DiagnosticsRecord:
    """
    Scalar diagnostics of the cross section ``r = ω``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param sigmas: Exponents ``σ ∈ [0, 1]`` of ``f_σ = (H²)^σ |Å|² / (H²)²``.
    :type sigmas: SigmaList
    :param t: Flow time stamped on the record.
    :type t: float
    :param psi_weight: Weight ``K₀`` in ``Ψ = |∇H²|²/H² + K₀|Å|²``.
    :type psi_weight: float
    :rtype: DiagnosticsRecord
    """
    grid = omega.grid
    q = lightcone_quantities(omega)
    a_ring2 = gamma_norm2(omega, q.A_ring)
    a2 = gamma_norm2(omega, q.A)
    h2 = q.h2
    h_theta, h_phi = grid.partials(h2)
    grad_h2 = (h_theta**2 + h_phi**2 / grid.sin_theta_mesh**2) / omega.values**2
    grad_a2 = gamma_norm2(omega, covariant_grad_sym2(omega, q.A))
    intrinsic = intrinsic_scalar_curvature(omega)
    diam_lo, diam_hi = diameter_bounds(omega)

    nonpositive = bool(np.any(h2 <= 0.0))
    if nonpositive:
        logger.warning("H² ≤ 0 at %d node(s) at t=%.6g.", int(np.sum(h2 <= 0.0)), t)
        f_sigma: Tuple[Optional[float], ...] = tuple(None for _ in sigmas)
        psi = None
        ratio = None
    else:
        f_sigma = tuple(float(np.max(h2 ** (sigma - 2.0) * a_ring2)) for sigma in sigmas)
        psi = float(np.max(grad_h2 / h2 + psi_weight * a_ring2))
        ratio = float(np.max(a2 / h2**2))

    return DiagnosticsRecord(
        t=t,
        vol=q.vol,
        h2_min=float(h2.min()),
        h2_max=float(h2.max()),
        r_min=float(q.R.min()),
        r_max=float(q.R.max()),
        a_ring_sq_max=float(a_ring2.max()),
        sigmas=tuple(sigmas),
        f_sigma=f_sigma,
        grad_h2_sq_max=float(grad_h2.max()),
        psi=psi,
        gauss_residual=float(np.max(np.abs(intrinsic - 0.5 * h2))),
        diam_lo=diam_lo,
        diam_hi=diam_hi,
        grad_ineq_slack=float(np.min(grad_a2 - 0.75 * grad_h2)),
        omega_min=float(omega.values.min()),
        omega_max=float(omega.values.max()),
        r_mean=grid.mean(q.R, weight=omega.values**2),
        a_h2_ratio_max=ratio,
        h2_norm_k2=grid.spectral_norm(h2, 2),
        h2_norm_k3=grid.spectral_norm(h2, 3),
        h2_nonpositive=nonpositive,
    )


def _stop_reason(state: FlowState, record: DiagnosticsRecord, opts: FlowOptions) -> Optional[str]:
    if record.omega_min < opts.extinction_epsilon:
        return StopCriterion.EXTINCTION.value
    if opts.stop is StopCriterion.CONVERGENCE and record.a_ring_sq_max < opts.convergence_epsilon:
        return StopCriterion.CONVERGENCE.value
    if opts.stop is StopCriterion.T_FINAL and state.t >= opts.t_final - _TIME_EPSILON:  # type: ignore[operator]
        return StopCriterion.T_FINAL.value
    return None


def _next_target(opts: FlowOptions, next_snapshot: Optional[float]) -> Optional[float]:
    targets = [] if next_snapshot is None else [next_snapshot]
    if opts.stop is StopCriterion.T_FINAL:
        targets.append(opts.t_final)
    return min(targets) if targets else None


def _assert_consistent(state: FlowState, opts: FlowOptions):
    if opts.mode is FlowMode.UNNORMALIZED:
        rhs(state.omega, opts.mode, check=True, tolerance=opts.consistency_tolerance)


def run_flow(omega0: ConformalFactor, opts: FlowOptions) -> TrajectoryLog:
    """
    Integrate the flow from ``omega0`` until the configured stop.

    A diagnostics record is taken at the start and after every accepted step;
    snapshots are taken at ``t = 0`` and every ``snapshot_every`` units of flow
    time, which the integrator lands on exactly.

    :param omega0: Initial conformal factor; it is projected onto the grid
        bandlimit first.
    :type omega0: ConformalFactor
    :param opts: Flow options.
    :type opts: FlowOptions
    :raises StiffFailureError: If the step size underflows.
    :raises PositivityLossError: If no step keeps the factor above the extinction
        floor.
    :raises FlowConsistencyError: If the normalized flow drifts in area, or the
        two unnormalized right-hand sides disagree at a record.
    :rtype: TrajectoryLog
    """
    grid = omega0.grid
    state = FlowState(
        t=0.0,
        omega=ConformalFactor(grid, grid.project(omega0.values)),
        dt=opts.dt_initial,
    )
    log = TrajectoryLog(
        grid=grid,
        metadata=TrajectoryMetadata(L=grid.L, oversample=grid.oversample, options=opts),
    )
    if np.any(null_expansion(state.omega) <= 0.0):
        logger.warning("Initial scalar curvature is not strictly positive; proceeding.")

    logger.info("Starting %s flow on %s.", opts.mode.value, grid)
    record = diagnostics(state.omega, opts.sigmas, 0.0, opts.psi_weight)
    log.append(record)
    _assert_consistent(state, opts)
    log.add_snapshot(0.0, state.omega.values)
    next_snapshot = opts.snapshot_every
    vol0 = record.vol
    steps = rejected = 0

    while True:
        reason = _stop_reason(state, record, opts)
        if reason is not None:
            break
        if steps >= opts.max_steps:
            logger.warning("Reached max_steps=%d at t=%.6g.", opts.max_steps, state.t)
            reason = "max_steps"
            break

        target = _next_target(opts, next_snapshot)
        proposed = state.dt
        state = step_adaptive(
            state, opts, dt_limit=None if target is None else target - state.t
        )
        if target is not None and abs(state.t - target) <= _TIME_EPSILON * max(1.0, target):
            state = replace(state, t=target, dt=max(state.dt or 0.0, proposed or 0.0))
        steps += 1
        rejected += state.rejected

        record = diagnostics(state.omega, opts.sigmas, state.t, opts.psi_weight)
        log.append(record)
        _assert_consistent(state, opts)

        if next_snapshot is not None and state.t >= next_snapshot - _TIME_EPSILON:
            log.add_snapshot(state.t, state.omega.values)
            next_snapshot = len(log.snapshots) * opts.snapshot_every  # type: ignore[operator]

        if opts.mode is FlowMode.NORMALIZED:
            drift = abs(record.vol - vol0) / vol0
            if drift > opts.volume_drift_tolerance * max(state.t, 1.0):
                raise FlowConsistencyError(
                    f"Area drifted by {drift:.3g} relative at t={state.t:.6g}."
                )

    metadata = log.metadata.model_copy(
        update={"stop_reason": reason, "steps": steps, "rejected_steps": rejected}
    )
    if opts.mode is FlowMode.UNNORMALIZED:
        metadata = metadata.model_copy(
            update={"extinction_estimate": record.t + record.vol / (8.0 * math.pi)}
        )
    log.metadata = metadata
    logger.info(
        "Stopped %s flow at t=%.9g after %d steps (%s).",
        opts.mode.value,
        state.t,
        steps,
        reason,
    )
    return log


def renormalize_trajectory(traj: TrajectoryLog) -> TrajectoryLog:
    """
    Rescale an unnormalized trajectory to the volume preserving flow.

    With ``r(t) = 8π / Vol(t)``, ``c(t) = exp(∫₀ᵗ r)`` and ``t̃ = ∫₀ᵗ c``, the
    rescaled cross sections are ``√c(t) ω(t)`` at times ``t̃(t)``. Both integrals
    use cubic spline quadrature of the logged records.

    :param traj: An unnormalized trajectory.
    :type traj: TrajectoryLog
    :raises TrajectoryTooSparseError: If there are too few records.
    :raises FlowConsistencyError: If the trajectory is not unnormalized.
    :rtype: TrajectoryLog
    """
    if traj.metadata.options.mode is not FlowMode.UNNORMALIZED or traj.metadata.renormalized:
        raise FlowConsistencyError("Only unnormalized trajectories can be renormalized.")
    if len(traj.records) < _MIN_RECORDS_FOR_QUADRATURE:
        raise TrajectoryTooSparseError(
            f"Need at least {_MIN_RECORDS_FOR_QUADRATURE} records, got {len(traj.records)}."
        )

    times = traj.times
    mean_curvature = 8.0 * math.pi / traj.column("vol")
    log_scale = CubicSpline(times, mean_curvature).antiderivative()
    scale = np.exp(log_scale(times))
    new_time = CubicSpline(times, scale).antiderivative()

    def rescaling(t: float) -> Tuple[float, float]:
        return float(np.exp(log_scale(t))), float(new_time(t))

    result = TrajectoryLog(
        grid=traj.grid,
        metadata=traj.metadata.model_copy(
            update={
                "renormalized": True,
                "extinction_estimate": None,
                "options": traj.metadata.options.model_copy(update={"mode": FlowMode.NORMALIZED}),
            }
        ),
    )
    for record in traj.records:
        c, t = rescaling(record.t)
        result.append(record.rescaled(c, t))
    for snapshot in traj.snapshots:
        c, t = rescaling(snapshot.t)
        result.add_snapshot(t, math.sqrt(c) * snapshot.values)
    logger.info(
        "Renormalized %d records; final scale %.6g at t̃=%.6g.",
        len(result.records),
        float(scale[-1]),
        result.records[-1].t,
    )
    return result


def round_solution(omega0: float, t: float) -> float:
    """Closed form ``√(ω₀² - 2t)`` of the unnormalized flow from ``ω ≡ ω₀``."""
    return math.sqrt(omega0 * omega0 - 2.0 * t)


def trajectory_summary(traj: TrajectoryLog) -> Dict[str, Any]:
    """Headline numbers of a trajectory, for reports."""
    first, last = traj.records[0], traj.records[-1]
    return {
        "records": len(traj.records),
        "snapshots": len(traj.snapshots),
        "t_final": last.t,
        "vol_initial": first.vol,
        "vol_final": last.vol,
        "h2_ratio_final": last.h2_max / last.h2_min if last.h2_min > 0 else None,
        "a_ring_sq_max_final": last.a_ring_sq_max,
        "stop_reason": traj.metadata.stop_reason,
        "extinction_estimate": traj.metadata.extinction_estimate,
    }

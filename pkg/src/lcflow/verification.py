"""
Verification module.

Residual checks of the geometric identities satisfied by lightcone cross
sections and of the estimates satisfied along the flow. Every check returns a
:class:`ResidualReport`; estimates whose constants are not explicit are
checked as boundedness, monotonicity or negative decay slopes.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydanticField, PositiveFloat
from scipy import stats

from .calculus import (
    conformal_scalar_ops,
    covariant_grad_sym2,
    gamma_norm2,
    rough_laplacian_sym2,
)
from .errors import InsufficientDataError, NonPositiveFactorError, SteadyStateFitError
from .flow import FlowMode, TrajectoryLog
from .geometry import (
    ConformalFactor,
    extrinsic_oracle_chi,
    gauss_residual,
    lightcone_quantities,
)
from .spectral import SphereGrid, SymTensorField, Tensor3Field
from .steady import fit_constant_curvature
from .types import Field, SigmaList

logger = logging.getLogger(__name__)

_ORDER_THRESHOLD = 1.9
_ROUNDOFF_FLOOR = 1e-9
_MIN_DECAY_RECORDS = 20
_DEGENERATE_LEVEL = 1e-9
_MIN_R_SQUARED = 0.99
# fourth order centered difference error of H² on the round solution, relative to
# ∂_t H², is 64 (h / ω²)⁴
_STRIDE_TRUNCATION = 64.0


class Tolerances(BaseModel):
    """Pass thresholds of the residual checks."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    codazzi: PositiveFloat = 1e-7
    simons: PositiveFloat = 1e-5
    gradient_inequality: PositiveFloat = 1e-8
    variation: PositiveFloat = 1e-5
    evolution: PositiveFloat = 1e-5
    monotonicity: PositiveFloat = 1e-8
    gradient_estimate: PositiveFloat = 1e-8
    gauss: PositiveFloat = 1e-8
    steady_fit: PositiveFloat = 1e-8
    extrinsic: PositiveFloat = 1e-5


DEFAULT_TOLERANCES = Tolerances()


class ResidualReport(BaseModel):
    """
    Outcome of one residual check.

    :ivar name: Check name.
    :type name: str
    :ivar max_residual: Largest residual found, never negative.
    :type max_residual: float
    :ivar scale: Size of the dominant term, for relative reading.
    :type scale: float
    :ivar L: State bandlimit of the grid.
    :type L: int
    :ivar tolerance: Threshold the residual was compared with.
    :type tolerance: float
    :ivar passed: Whether the check passed; serialized as ``pass``.
    :type passed: bool
    :ivar details: Check specific numbers such as orders or slopes.
    :type details: Dict[str, Any]
    """

    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="constants")

    name: str
    max_residual: float = PydanticField(ge=0.0)
    scale: float = 0.0
    L: int
    tolerance: float
    passed: bool = PydanticField(alias="pass")
    details: Dict[str, Any] = PydanticField(default_factory=dict)


def _report(
    name: str,
    residual: float,
    grid: SphereGrid,
    tolerance: float,
    passed: Optional[bool] = None,
    scale: float = 0.0,
    **details: Any,
) -> ResidualReport:
    residual = float(max(residual, 0.0))
    passed = residual <= tolerance if passed is None else passed
    report = ResidualReport(
        name=name,
        max_residual=residual,
        scale=float(scale),
        L=grid.L,
        tolerance=tolerance,
        passed=bool(passed),
        details=details,
    )
    logger.debug("Check %s: residual %.3g (%s).", name, residual, "pass" if passed else "fail")
    return report


def _max_norm(omega: ConformalFactor, tensor: Any) -> float:
    return float(np.sqrt(np.max(gamma_norm2(omega, tensor))))


def check_codazzi(omega: ConformalFactor, tol: float = DEFAULT_TOLERANCES.codazzi) -> ResidualReport:
    """
    Codazzi equations on the lightcone.

    ``∇A`` is totally symmetric, and ``∇_iχ_jk - ∇_jχ_ik - ζ_jχ_ik + ζ_iχ_jk = 0``.
    The report carries the larger of the two ``γ``-norm residuals.
    """
    q = lightcone_quantities(omega)
    grad_a = covariant_grad_sym2(omega, q.A)
    first = _max_norm(omega, grad_a.antisymmetrized())

    grad_chi = covariant_grad_sym2(omega, q.chi).components
    zeta = q.zeta.as_array()
    chi = q.chi.as_array()
    torsion = np.einsum("jxy,ikxy->ijkxy", zeta, chi)
    combination = (
        grad_chi - np.swapaxes(grad_chi, 0, 1) - torsion + np.swapaxes(torsion, 0, 1)
    )
    second = _max_norm(omega, Tensor3Field(combination))
    return _report(
        "codazzi",
        max(first, second),
        omega.grid,
        tol,
        scale=_max_norm(omega, grad_a),
        symmetric_a=first,
        chi_torsion=second,
    )


def check_simons(omega: ConformalFactor, tol: float = DEFAULT_TOLERANCES.simons) -> ResidualReport:
    """
    Null Simons identity ``ΔA = Hess H² + ½ H² Å``.

    The residual is relative to the larger of one and ``max|ΔA| + max|Hess H²|``.
    """
    q = lightcone_quantities(omega)
    laplacian_a = rough_laplacian_sym2(omega, q.A)
    hessian_h2 = conformal_scalar_ops(omega, q.h2).hessian
    difference = laplacian_a - hessian_h2 - q.A_ring * (0.5 * q.h2)
    scale = _max_norm(omega, laplacian_a) + _max_norm(omega, hessian_h2)
    residual = _max_norm(omega, difference) / max(scale, 1.0)
    return _report("simons", residual, omega.grid, tol, scale=scale)


def gradient_slack(omega: ConformalFactor) -> Field:
    """Pointwise ``|∇A|² - ¾ |∇H²|²``."""
    q = lightcone_quantities(omega)
    grad_a2 = gamma_norm2(omega, covariant_grad_sym2(omega, q.A))
    grad_h2 = conformal_scalar_ops(omega, q.h2).grad_norm2
    return grad_a2 - 0.75 * grad_h2


def check_gradient_inequality(
    omega: ConformalFactor, tol: float = DEFAULT_TOLERANCES.gradient_inequality
) -> ResidualReport:
    """``|∇A|² ≥ ¾ |∇H²|²``; passes when the minimum slack is at least ``-tol``."""
    slack = float(np.min(gradient_slack(omega)))
    return _report(
        "gradient_inequality",
        -slack,
        omega.grid,
        tol,
        passed=slack >= -tol,
        min_slack=slack,
    )


def _variation_fields(omega: ConformalFactor) -> Dict[str, Any]:
    q = lightcone_quantities(omega)
    return {
        "gamma": q.gamma,
        "theta_lower": q.theta_lower,
        "theta": q.theta,
        "A": q.A,
        "h2": q.h2,
    }


def _variation_analytic(omega: ConformalFactor, phi: Field) -> Dict[str, Any]:
    grid = omega.grid
    w = omega.values
    q = lightcone_quantities(omega)
    phi_ops = conformal_scalar_ops(omega, phi)
    phi_theta, phi_phi = grid.partials(phi)
    s2 = grid.sin_theta_mesh**2

    gradient_zeta = (phi_theta * q.zeta.theta + phi_phi * q.zeta.phi / s2) / w**2
    log_laplacian = grid.laplacian0(np.log(w))
    div_zeta = -log_laplacian / w**2
    zeta_norm2 = gamma_norm2(omega, q.zeta)

    weighted = q.theta_lower * phi
    weighted_ops = conformal_scalar_ops(omega, weighted)
    return {
        "gamma": q.gamma * (2.0 * phi / w),
        "theta_lower": -2.0 * phi / w**2,
        "theta": -2.0 * phi_ops.laplacian
        - 4.0 * gradient_zeta
        - phi * (0.5 * q.h2 + 2.0 * div_zeta + 2.0 * zeta_norm2),
        "A": weighted_ops.hessian * -2.0,
        "h2": -2.0 * weighted_ops.laplacian - weighted * q.h2,
    }


def _order(coarse: float, fine: float, ratio: float) -> float:
    """Observed convergence order between two errors at step ratio ``ratio``."""
    if coarse <= 0.0 or fine <= 0.0:
        return math.inf
    return math.log(coarse / fine) / math.log(ratio)


def _difference_norm(omega: ConformalFactor, left: Any, right: Any) -> float:
    if isinstance(left, SymTensorField):
        return _max_norm(omega, left - right)
    return float(np.max(np.abs(left - right)))


def _size(omega: ConformalFactor, value: Any) -> float:
    if isinstance(value, SymTensorField):
        return _max_norm(omega, value)
    return float(np.max(np.abs(value)))


def check_variation(
    omega: ConformalFactor,
    phi: Field,
    eps: float = 1e-3,
    tol: float = DEFAULT_TOLERANCES.variation,
) -> ResidualReport:
    """
    First variations of ``γ, θ̲, θ, A, H²`` under ``ω → ω + εφ``.

    Central differences at ``ε`` and ``ε/2`` are compared with

    - ``dγ = 2φχ̲``,
    - ``dθ̲ = -φ|χ̲|²``,
    - ``dθ = -2Δφ - 4γ(∇φ, ζ) - φ(½H² + 2 div ζ + 2|ζ|²)``,
    - ``dA = -2 Hess(θ̲φ)``,
    - ``dH² = -2Δ(θ̲φ) - θ̲φ H²``.

    Each identity passes when its relative error at ``ε/2`` is below ``tol`` and
    the measured order in ``ε`` is at least 1.9, or the error already sits at
    round-off.

    :raises NonPositiveFactorError: If ``ω ± εφ`` is not positive.
    """
    grid = omega.grid
    phi = grid.check_field(phi)
    analytic = _variation_analytic(omega, phi)

    def central(step: float) -> Dict[str, Any]:
        try:
            plus = _variation_fields(ConformalFactor(grid, omega.values + step * phi))
            minus = _variation_fields(ConformalFactor(grid, omega.values - step * phi))
        except NonPositiveFactorError as ex:
            raise NonPositiveFactorError(f"Variation probe leaves the positive cone: {ex}") from ex
        return {key: (plus[key] - minus[key]) * (0.5 / step) for key in plus}

    coarse, fine = central(eps), central(0.5 * eps)
    details: Dict[str, Any] = {}
    worst, passed = 0.0, True
    for key, exact in analytic.items():
        scale = max(_size(omega, exact), 1.0)
        error_coarse = _difference_norm(omega, coarse[key], exact) / scale
        error_fine = _difference_norm(omega, fine[key], exact) / scale
        at_roundoff = error_coarse <= _ROUNDOFF_FLOOR
        order = _order(error_coarse, error_fine, 2.0)
        ok = error_fine <= tol and (at_roundoff or order >= _ORDER_THRESHOLD)
        details[key] = {"error": error_fine, "error_coarse": error_coarse, "order": order, "pass": ok}
        worst = max(worst, error_fine)
        passed = passed and ok
    return _report("variation", worst, grid, tol, passed=passed, eps=eps, identities=details)


def extrinsic_chi_errors(
    omega: ConformalFactor, steps: Sequence[float] = (2e-3, 1e-3)
) -> Tuple[List[float], List[float]]:
    """Max ``γ``-norm error of the embedding oracle for ``χ`` at each step."""
    chi = lightcone_quantities(omega).chi
    errors = [_max_norm(omega, extrinsic_oracle_chi(omega, h) - chi) for h in steps]
    return list(steps), errors


def check_extrinsic_oracle(
    omega: ConformalFactor,
    steps: Sequence[float] = (2e-3, 1e-3),
    tol: float = DEFAULT_TOLERANCES.extrinsic,
) -> ResidualReport:
    """
    Intrinsic ``χ`` against second differences of the embedding.

    Passes when the error at the finest step is below ``tol`` and decays at
    order at least 1.9 in the step.
    """
    hs, errors = extrinsic_chi_errors(omega, steps)
    orders = [_order(errors[k], errors[k + 1], hs[k] / hs[k + 1]) for k in range(len(hs) - 1)]
    passed = errors[-1] <= tol and (
        errors[0] <= _ROUNDOFF_FLOOR or all(order >= _ORDER_THRESHOLD for order in orders)
    )
    return _report(
        "extrinsic_oracle",
        errors[-1],
        omega.grid,
        tol,
        passed=passed,
        steps=hs,
        errors=errors,
        orders=orders,
    )


def _uniform_snapshots(traj: TrajectoryLog, minimum: int) -> float:
    if len(traj.snapshots) < minimum:
        raise InsufficientDataError(
            f"Need at least {minimum} snapshots, got {len(traj.snapshots)}."
        )
    times = np.array([snapshot.t for snapshot in traj.snapshots])
    strides = np.diff(times)
    stride = float(strides[0])
    if not np.allclose(strides, stride, rtol=1e-9, atol=1e-12):
        raise InsufficientDataError("Snapshot stride is not uniform.")
    return stride


def check_evolution(
    traj: TrajectoryLog, tol: float = DEFAULT_TOLERANCES.evolution
) -> ResidualReport:
    """
    Evolution equations along unnormalized flow, from snapshots.

    Fourth order centered differences in time of ``H²`` and ``|A|²`` are compared
    with ``ΔH² + ½(H²)²`` and ``Δ|A|² - 2|∇A|² + ½(H²)³``, relative to the
    larger of one and the right-hand side. The records are also audited for
    ``max |A|²/(H²)²`` being nonincreasing up to ``monotonicity`` per step.

    The stride must resolve the time scale ``min ω²`` of the flow: it is too
    coarse when the truncation error ``64 (stride / min ω²)⁴`` of the centered
    difference on the round solution alone exceeds ``tol``.

    :raises InsufficientDataError: If there are fewer than five snapshots, the
        stride is not uniform or the stride is too coarse.
    """
    stride = _uniform_snapshots(traj, 5)
    time_scale = min(float(np.min(snapshot.values)) for snapshot in traj.snapshots) ** 2
    truncation = _STRIDE_TRUNCATION * (stride / time_scale) ** 4
    if truncation > tol:
        raise InsufficientDataError(
            f"Snapshot stride {stride:.3g} is too coarse for the time scale "
            f"{time_scale:.3g}: truncation {truncation:.3g} exceeds {tol:g}."
        )
    grid = traj.grid
    fields = []
    for snapshot in traj.snapshots:
        omega = traj.conformal_factor(snapshot)
        q = lightcone_quantities(omega)
        fields.append((omega, q, gamma_norm2(omega, q.A)))

    errors_h2, errors_a2 = [], []
    for j in range(2, len(fields) - 2):
        omega, q, a2 = fields[j]

        def centered(select: Callable[[Tuple[Any, ...]], Field]) -> Field:
            return (
                -select(fields[j + 2]) + 8.0 * select(fields[j + 1])
                - 8.0 * select(fields[j - 1]) + select(fields[j - 2])
            ) / (12.0 * stride)

        rate_h2 = centered(lambda item: item[1].h2)
        rate_a2 = centered(lambda item: item[2])
        rhs_h2 = conformal_scalar_ops(omega, q.h2).laplacian + 0.5 * q.h2**2
        grad_a2 = gamma_norm2(omega, covariant_grad_sym2(omega, q.A))
        rhs_a2 = conformal_scalar_ops(omega, a2).laplacian - 2.0 * grad_a2 + 0.5 * q.h2**3
        errors_h2.append(
            float(np.max(np.abs(rate_h2 - rhs_h2))) / max(float(np.max(np.abs(rhs_h2))), 1.0)
        )
        errors_a2.append(
            float(np.max(np.abs(rate_a2 - rhs_a2))) / max(float(np.max(np.abs(rhs_a2))), 1.0)
        )

    ratio = np.array(
        [np.nan if r.a_h2_ratio_max is None else r.a_h2_ratio_max for r in traj.records]
    )
    increases = np.diff(ratio[np.isfinite(ratio)])
    worst_increase = float(increases.max()) if increases.size else 0.0
    monotone = worst_increase <= DEFAULT_TOLERANCES.monotonicity

    residual = max(max(errors_h2), max(errors_a2))
    return _report(
        "evolution",
        residual,
        grid,
        tol,
        passed=residual <= tol and monotone,
        stride=stride,
        h2_error=max(errors_h2),
        a2_error=max(errors_a2),
        ratio_max_increase=worst_increase,
    )


def fit_decay(times: np.ndarray, values: np.ndarray) -> Dict[str, float]:
    """Least squares slope of ``log(values)`` against ``times`` and its ``R²``."""
    fit = stats.linregress(times, np.log(values))
    return {"slope": float(fit.slope), "r_squared": float(fit.rvalue**2)}


def check_monotonicity_decay(
    traj: TrajectoryLog,
    sigmas: Optional[SigmaList] = None,
    tol: float = DEFAULT_TOLERANCES.monotonicity,
) -> ResidualReport:
    """
    Pinching bounds and exponential decay along normalized flow.

    ``max f_σ`` must stay below its initial value plus ``tol`` for every ``σ``;
    ``max|Å|²``, ``max|∇H²|²``, ``H²_max - H²_min`` and the spectral norms of
    ``H²`` for ``k = 2, 3`` must have negative fitted log-slopes with
    ``R² > 0.99`` over the final two thirds of the run. Runs whose monitored
    quantities all stay below ``1e-9`` pass as degenerate.

    :raises InsufficientDataError: If there are fewer than 20 records.
    """
    if len(traj.records) < _MIN_DECAY_RECORDS:
        raise InsufficientDataError(
            f"Need at least {_MIN_DECAY_RECORDS} records, got {len(traj.records)}."
        )
    if traj.metadata.options.mode is not FlowMode.NORMALIZED:
        logger.warning("Decay check applied to a trajectory of an unnormalized flow.")
    sigmas = traj.records[0].sigmas if sigmas is None else sigmas
    times = traj.times

    bounds: Dict[str, Any] = {}
    excess = 0.0
    for sigma in sigmas:
        values = traj.f_sigma_column(sigma)
        if not np.all(np.isfinite(values)):
            raise InsufficientDataError(f"f_σ for σ={sigma:g} is undefined on some record.")
        over = float(np.max(values - values[0]))
        steps = np.diff(values) - tol * np.diff(times)
        bounds[f"{sigma:g}"] = {
            "initial": float(values[0]),
            "excess": over,
            "monotone": bool(np.all(steps <= 0.0)),
        }
        excess = max(excess, over)

    monitored = {
        "a_ring_sq_max": traj.column("a_ring_sq_max"),
        "grad_h2_sq_max": traj.column("grad_h2_sq_max"),
        "h2_oscillation": traj.column("h2_max") - traj.column("h2_min"),
        "h2_norm_k2": traj.column("h2_norm_k2"),
        "h2_norm_k3": traj.column("h2_norm_k3"),
    }
    degenerate = all(float(np.max(values)) < _DEGENERATE_LEVEL for values in monitored.values())
    fits: Dict[str, Dict[str, float]] = {}
    decaying = True
    if not degenerate:
        start = len(times) // 3
        for name, values in monitored.items():
            fits[name] = fit_decay(times[start:], values[start:])
            decaying = decaying and (
                fits[name]["slope"] < 0.0 and fits[name]["r_squared"] > _MIN_R_SQUARED
            )

    return _report(
        "monotonicity_decay",
        excess,
        traj.grid,
        tol,
        passed=excess <= tol and decaying,
        degenerate=degenerate,
        bounds=bounds,
        fits=fits,
    )


def check_gradient_estimate(
    traj: TrajectoryLog,
    etas: Sequence[float] = (0.5, 0.25),
    slack: float = 2.0,
    tol: float = DEFAULT_TOLERANCES.gradient_estimate,
) -> ResidualReport:
    """
    Gradient estimate ``|∇R| ≤ η² R^{3/2} + C_η`` along unnormalized flow.

    ``C(η, t) = max(|∇R| - η² R₊^{3/2})`` must stay below ``slack`` times its
    maximum over the first quarter of the snapshots (clipped at zero) plus
    ``tol``.

    :raises InsufficientDataError: If there are fewer than four snapshots.
    """
    if len(traj.snapshots) < 4:
        raise InsufficientDataError(
            f"Need at least 4 snapshots, got {len(traj.snapshots)}."
        )
    grid = traj.grid
    gradient_terms = []
    for snapshot in traj.snapshots:
        omega = traj.conformal_factor(snapshot)
        curvature = lightcone_quantities(omega).R
        gradient = np.sqrt(conformal_scalar_ops(omega, curvature).grad_norm2)
        gradient_terms.append((gradient, np.clip(curvature, 0.0, None) ** 1.5))

    early = max(1, len(gradient_terms) // 4)
    details: Dict[str, Any] = {}
    worst, passed = 0.0, True
    for eta in etas:
        constants = np.array(
            [float(np.max(gradient - eta**2 * power)) for gradient, power in gradient_terms]
        )
        bound = slack * max(float(constants[:early].max()), 0.0) + tol
        excess = float(constants.max()) - bound
        details[f"{eta:g}"] = {"sup": float(constants.max()), "bound": bound}
        worst = max(worst, excess)
        passed = passed and excess <= 0.0
    return _report("gradient_estimate", worst, grid, tol, passed=passed, etas=details)


def monitor_barrier(
    traj: TrajectoryLog, eps: float = 0.125, floor: float = 1e-12
) -> ResidualReport:
    """
    Barrier ``G_ε = 2C_ε + ε(H²)² - |Å|²`` along a trajectory.

    ``C_ε = max(|Å|² - ε(H²)²)`` on the first snapshot (clipped at zero, plus
    ``floor``), so ``G_ε ≥ C_ε > 0`` initially. Passes while the minimum over all
    snapshots stays positive; the residual is how far it dips below zero.

    :raises InsufficientDataError: If there are no snapshots.
    """
    if not traj.snapshots:
        raise InsufficientDataError("Barrier monitoring needs snapshots.")
    values = []
    for snapshot in traj.snapshots:
        omega = traj.conformal_factor(snapshot)
        q = lightcone_quantities(omega)
        values.append((q.h2, gamma_norm2(omega, q.A_ring)))
    h2, a_ring2 = values[0]
    constant = max(float(np.max(a_ring2 - eps * h2**2)), 0.0) + floor
    minimum = min(float(np.min(2.0 * constant + eps * h2**2 - a_ring2)) for h2, a_ring2 in values)
    return _report(
        "barrier",
        -minimum,
        traj.grid,
        0.0,
        passed=minimum > 0.0,
        eps=eps,
        constant=constant,
        min_barrier=minimum,
    )


def check_gauss(omega: ConformalFactor, tol: float = DEFAULT_TOLERANCES.gauss) -> ResidualReport:
    """Gauss equation ``R = ½H²`` pointwise and Gauss-Bonnet ``∫R dμ = 8π``."""
    q = lightcone_quantities(omega)
    total = float(omega.grid.integrate(q.R * omega.values**2))
    bonnet = abs(total - 8.0 * math.pi) / (8.0 * math.pi)
    residual = gauss_residual(omega)
    return _report(
        "gauss",
        max(residual, bonnet),
        omega.grid,
        tol,
        scale=float(np.max(np.abs(q.R))),
        gauss_residual=residual,
        gauss_bonnet=bonnet,
    )


def check_steady_fit(
    omega: ConformalFactor, tol: float = DEFAULT_TOLERANCES.steady_fit
) -> ResidualReport:
    """Distance of ``ω`` from the constant curvature family."""
    try:
        params, residual = fit_constant_curvature(omega)
    except SteadyStateFitError as ex:
        logger.warning("Steady state fit failed: %s", ex)
        return _report("steady_fit", math.inf, omega.grid, tol, passed=False, error=str(ex))
    return _report("steady_fit", residual, omega.grid, tol, c=params.c, a=list(params.a))


def refinement_study(
    factory: Callable[[SphereGrid], ConformalFactor],
    check: Callable[[ConformalFactor], ResidualReport],
    bandlimits: Sequence[int] = (16, 24, 32),
    floor: float = 1e-11,
    oversample: float = 2.0,
) -> ResidualReport:
    """
    Residual of ``check`` under refinement of the bandlimit.

    Passes when every residual is no larger than the previous one or already
    below ``floor``.

    :param factory: Builds the conformal factor on a grid.
    :type factory: Callable[[SphereGrid], ConformalFactor]
    :param check: Residual check to repeat.
    :type check: Callable[[ConformalFactor], ResidualReport]
    :param bandlimits: Increasing bandlimits.
    :type bandlimits: Sequence[int]
    :rtype: ResidualReport
    """
    residuals = []
    name = "refinement"
    for bandlimit in bandlimits:
        report = check(factory(SphereGrid(bandlimit, oversample)))
        residuals.append(report.max_residual)
        name = f"refinement_{report.name}"
    decreasing = all(
        later <= earlier or later <= floor for earlier, later in zip(residuals, residuals[1:])
    )
    final_grid = SphereGrid(bandlimits[-1], oversample)
    return _report(
        name,
        residuals[-1],
        final_grid,
        floor,
        passed=decreasing,
        bandlimits=list(bandlimits),
        residuals=residuals,
    )

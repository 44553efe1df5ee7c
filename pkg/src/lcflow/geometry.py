"""
Lightcone geometry module.

A cross section of the standard Minkowski lightcone through the origin is the
graph ``r = ω(x)`` over the unit sphere, with induced metric ``γ = ω² dΩ²``.
This module computes its null expansions, second fundamental forms, torsion
and curvature from ``ω``, and the ambient embedding that serves as an
independent oracle for them.

Null normals are normalized by ``⟨L, L̲⟩ = 2`` with ``L̲ = (-1, x)`` tangent to
the cone generators, so that ``χ̲ = γ / ω`` and ``θ̲ = 2 / ω``.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from .calculus import (
    conformal_hessian,
    gamma_norm2,
    metric_tensor,
    trace_free,
)
from .errors import FrameConditioningError, NonPositiveFactorError
from .spectral import (
    MetricTag,
    RoundDerivatives,
    SphereGrid,
    SymTensorField,
    VectorFieldSph,
)
from .types import Coefficients, Field

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_STEPS: Tuple[float, ...] = (1e-3, 5e-4)
DEFAULT_CONDITION_THRESHOLD = 1e-8


class ConformalFactor:
    """
    A strictly positive conformal factor ``ω`` sampled on a sphere grid.

    Spectral data of ``ω`` is computed lazily and cached, so the same instance
    can be handed to several geometric operators.

    :param grid: The quadrature grid.
    :type grid: SphereGrid
    :param values: Samples of ``ω`` at the grid nodes.
    :type values: Field
    :raises NonPositiveFactorError: If some sample is not finite or ``≤ 0``.
    :raises GridError: If ``values`` does not match the grid.
    """

    def __init__(self, grid: SphereGrid, values: Field):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            grid.check_field(values)
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
            bad = int(np.sum(~np.isfinite(values) | (values <= 0.0)))
            raise NonPositiveFactorError(
                f"Conformal factor is not strictly positive at {bad} node(s)."
            )
        self.grid = grid
        self.values: Field = values

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}("
            f"grid={self.grid!r},"
            f"min={self.values.min():.6g},"
            f"max={self.values.max():.6g},"
            ")"
        )

    @classmethod
    def constant(cls, grid: SphereGrid, value: float = 1.0) -> "ConformalFactor":
        """The round sphere of radius ``value``."""
        return cls(grid, np.full(grid.shape, float(value)))

    @cached_property
    def coefficients(self) -> Coefficients:
        """Harmonic coefficients of ``ω`` up to ``L_max``."""
        return self.grid.analyze(self.values, self.grid.L_max)

    @cached_property
    def partials(self) -> Tuple[Field, Field]:
        """``(∂_θ ω, ∂_φ ω)``."""
        coeffs = self.coefficients
        return (
            self.grid.synthesize(coeffs, dtheta=1),
            self.grid.synthesize(coeffs, dphi=1),
        )

    @cached_property
    def derivatives(self) -> RoundDerivatives:
        d_theta, d_phi = self.partials
        coeffs = self.coefficients
        return RoundDerivatives(
            d_theta=d_theta,
            d_phi=d_phi,
            d_theta2=self.grid.synthesize(coeffs, dtheta=2),
            d_theta_phi=self.grid.synthesize(coeffs, dtheta=1, dphi=1),
            d_phi2=self.grid.synthesize(coeffs, dphi=2),
        )

    @cached_property
    def laplacian0(self) -> Field:
        """Round Laplacian ``Δ₀ ω``."""
        degree = np.arange(self.grid.L_max + 1, dtype=np.float64)
        return self.grid.synthesize(self.coefficients * -(degree * (degree + 1.0))[:, None])

    @cached_property
    def gradient_norm2(self) -> Field:
        """Round squared gradient ``|∇ω|²₀``."""
        d_theta, d_phi = self.partials
        return d_theta**2 + d_phi**2 / self.grid.sin_theta_mesh**2

    @cached_property
    def log_gradient(self) -> np.ndarray:
        """Covariant components of ``d log ω``, shape ``(2, N_θ, N_φ)``."""
        d_theta, d_phi = self.partials
        return np.stack([d_theta / self.values, d_phi / self.values])

    @cached_property
    def hessian0(self) -> SymTensorField:
        """Round covariant Hessian ``Hess₀ ω``."""
        d = self.derivatives
        s, c = self.grid.sin_theta_mesh, self.grid.cos_theta_mesh
        return SymTensorField(
            tt=d.d_theta2,
            tp=d.d_theta_phi - (c / s) * d.d_phi,
            pp=d.d_phi2 + s * c * d.d_theta,
            metric=MetricTag.ROUND,
        )

    def evaluate(self, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """Evaluate the spectral interpolant of ``ω`` off the grid."""
        return self.grid.evaluate(self.coefficients, theta, phi)


@dataclass
class LightconeQuantities:
    """
    Geometric quantities of the cross section ``r = ω``.

    :ivar gamma: Induced metric ``γ = ω² dΩ²``.
    :vartype gamma: SymTensorField
    :ivar theta_lower: Expansion ``θ̲ = 2 / ω`` along ``L̲``.
    :vartype theta_lower: Field
    :ivar theta: Expansion ``θ`` along ``L``.
    :vartype theta: Field
    :ivar chi_lower: Second fundamental form ``χ̲ = γ / ω``.
    :vartype chi_lower: SymTensorField
    :ivar chi: Second fundamental form ``χ`` along ``L``.
    :vartype chi: SymTensorField
    :ivar zeta: Torsion one-form ``ζ = -d log ω``.
    :vartype zeta: VectorFieldSph
    :ivar A: Scalar-valued second fundamental form ``A = θ̲ χ``.
    :vartype A: SymTensorField
    :ivar A_ring: Trace-free part ``Å = A - ½ H² γ``.
    :vartype A_ring: SymTensorField
    :ivar h2: Spacetime mean curvature squared ``H² = θ̲ θ``.
    :vartype h2: Field
    :ivar K: Gauss curvature ``θ / (2ω)``.
    :vartype K: Field
    :ivar R: Scalar curvature ``2K``.
    :vartype R: Field
    :ivar vol: Area ``∫ ω² dΩ``.
    :vartype vol: float
    """

    gamma: SymTensorField
    theta_lower: Field
    theta: Field
    chi_lower: SymTensorField
    chi: SymTensorField
    zeta: VectorFieldSph
    A: SymTensorField
    A_ring: SymTensorField
    h2: Field
    K: Field
    R: Field
    vol: float


def null_expansion(omega: ConformalFactor) -> Field:
    """
    Expansion ``θ = 2(1/ω + ω⁻³ |∇ω|²₀ - ω⁻² Δ₀ω)`` along ``L``.

    Only first derivatives and the Laplacian are needed, so this is the cheap
    path used by the flow right-hand side.
    """
    w = omega.values
    return 2.0 * (1.0 / w + omega.gradient_norm2 / w**3 - omega.laplacian0 / w**2)


def hessian_of_omega(omega: ConformalFactor) -> SymTensorField:
    """``Hess_γ ω = Hess₀ω - 2 dω ⊗ dω / ω + g₀ |∇ω|²₀ / ω``."""
    d_theta, d_phi = omega.partials
    return conformal_hessian(omega, omega.hessian0, d_theta, d_phi)


def lightcone_quantities(omega: ConformalFactor) -> LightconeQuantities:
    """
    All local geometry of the cross section ``r = ω``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :rtype: LightconeQuantities

    Example::

        q = lightcone_quantities(ConformalFactor.constant(grid, 2.0))
        # q.h2 == 1.0 everywhere, q.A_ring == 0
    """
    w = omega.values
    d_theta, d_phi = omega.partials
    gamma = metric_tensor(omega)
    theta_lower = 2.0 / w
    theta = null_expansion(omega)
    chi = gamma * ((1.0 + omega.gradient_norm2 / w**2) / w) - 2.0 * hessian_of_omega(omega)
    A = chi * theta_lower
    h2 = theta_lower * theta
    K = theta / (2.0 * w)
    return LightconeQuantities(
        gamma=gamma,
        theta_lower=theta_lower,
        theta=theta,
        chi_lower=gamma * (1.0 / w),
        chi=chi,
        zeta=VectorFieldSph(-d_theta / w, -d_phi / w, covariant=True),
        A=A,
        A_ring=trace_free(omega, A),
        h2=h2,
        K=K,
        R=2.0 * K,
        vol=float(omega.grid.integrate(w**2)),
    )


def intrinsic_scalar_curvature(omega: ConformalFactor) -> Field:
    """Scalar curvature of ``γ`` from the conformal formula ``2(1 - Δ₀ log ω) / ω²``."""
    grid = omega.grid
    log_w = np.log(omega.values)
    return 2.0 * (1.0 - grid.laplacian0(log_w)) / omega.values**2


def gauss_residual(omega: ConformalFactor) -> float:
    """
    Maximum of ``|R_intrinsic - ½ H²|`` over the nodes.

    On the lightcone the Gauss equation reads ``R = ½ H²``; comparing against the
    intrinsic conformal formula checks the extrinsic computation.
    """
    h2 = 2.0 * null_expansion(omega) / omega.values
    return float(np.max(np.abs(intrinsic_scalar_curvature(omega) - 0.5 * h2)))


def diameter_bounds(omega: ConformalFactor) -> Tuple[float, float]:
    """
    Bounds ``π min ω ≤ diam(γ) ≤ π max ω`` of the intrinsic diameter.

    Distances of ``γ`` are those of ``dΩ²`` stretched by at most ``max ω`` and at
    least ``min ω``, and the round diameter is ``π``.
    """
    return math.pi * float(omega.values.min()), math.pi * float(omega.values.max())


def minkowski_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``η(a, b) = -a⁰b⁰ + a·b`` over the leading axis of length 4."""
    return -a[0] * b[0] + np.sum(a[1:] * b[1:], axis=0)


@dataclass
class AmbientPoints:
    """
    Embedding of a cross section in Minkowski space.

    :ivar events: Points ``X = (-ω, ω x)``, shape ``(4, N_θ, N_φ)``.
    :vartype events: np.ndarray
    :ivar tangents: Coordinate tangents ``∂_θ X, ∂_φ X``, shape ``(2, 4, N_θ, N_φ)``.
    :vartype tangents: np.ndarray
    :ivar L_lower: Null normal ``L̲ = (-1, x)``, when a frame was computed.
    :vartype L_lower: Optional[np.ndarray]
    :ivar L: Null normal with ``⟨L, L̲⟩ = 2``, when a frame was computed.
    :vartype L: Optional[np.ndarray]
    :ivar condition: Smallest ratio of singular values of the frame systems.
    :vartype condition: Optional[float]
    """

    events: np.ndarray
    tangents: np.ndarray
    L_lower: Optional[np.ndarray] = None
    L: Optional[np.ndarray] = None
    condition: Optional[float] = None

    @property
    def null_coordinate(self) -> Field:
        """``v = r + t`` at every event; zero on the past cone."""
        radius = np.sqrt(np.sum(self.events[1:] ** 2, axis=0))
        return radius + self.events[0]

    def induced_metric(self) -> SymTensorField:
        """Pull-back ``η(∂_i X, ∂_j X)`` of the Minkowski metric."""
        v_theta, v_phi = self.tangents
        return SymTensorField(
            minkowski_inner(v_theta, v_theta),
            minkowski_inner(v_theta, v_phi),
            minkowski_inner(v_phi, v_phi),
            MetricTag.CONFORMAL,
        )


def _events(grid: SphereGrid, w: np.ndarray, unit: np.ndarray) -> np.ndarray:
    return np.concatenate([-w[None], w[None] * unit])


def embed(omega: ConformalFactor) -> AmbientPoints:
    """
    Embed the cross section as ``X = (-ω, ω x)`` with its coordinate tangents.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :rtype: AmbientPoints
    """
    grid = omega.grid
    w = omega.values
    d_theta, d_phi = omega.partials
    tangents = np.stack(
        [
            np.concatenate([-d_theta[None], d_theta * grid.cartesian + w * grid.e_theta]),
            np.concatenate([-d_phi[None], d_phi * grid.cartesian + w * grid.e_phi]),
        ]
    )
    return AmbientPoints(events=_events(grid, w, grid.cartesian), tangents=tangents)


def _lower_index(vectors: np.ndarray) -> np.ndarray:
    lowered = vectors.copy()
    lowered[..., 0] = -lowered[..., 0]
    return lowered


def null_frame(
    omega: ConformalFactor, condition_threshold: float = DEFAULT_CONDITION_THRESHOLD
) -> AmbientPoints:
    """
    Embedding together with the null normals ``L̲`` and ``L``.

    At every node ``L`` solves ``η(L, ∂_θX) = η(L, ∂_φX) = 0``, ``η(L, L̲) = 2``
    and ``η(L, L) = 0``: the three linear conditions are solved in the least
    norm sense and the remaining freedom ``L₀ + λ L̲`` is fixed by the null
    condition, ``λ = -η(L₀, L₀) / 4``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param condition_threshold: Smallest acceptable ratio of singular values.
    :type condition_threshold: float
    :raises FrameConditioningError: If some node's system is ill-conditioned.
    :rtype: AmbientPoints
    """
    grid = omega.grid
    points = embed(omega)
    l_lower = np.concatenate([-np.ones((1,) + grid.shape), grid.cartesian])

    rows = np.stack([points.tangents[0], points.tangents[1], l_lower])  # (3, 4, ...)
    matrices = _lower_index(np.moveaxis(rows, (0, 1), (-2, -1)).reshape(-1, 3, 4))
    if not np.all(np.isfinite(matrices)):
        raise FrameConditioningError("Null frame system has non-finite entries.")

    singular = np.linalg.svd(matrices, compute_uv=False)
    ratios = singular[:, -1] / singular[:, 0]
    condition = float(ratios.min())
    if condition < condition_threshold:
        raise FrameConditioningError(
            f"Null frame system is ill-conditioned (singular value ratio {condition:.3g})."
        )

    rhs = np.array([0.0, 0.0, 2.0])
    particular = np.linalg.pinv(matrices) @ rhs  # (N, 4)
    particular = np.moveaxis(particular.reshape(grid.shape + (4,)), -1, 0)
    shift = -minkowski_inner(particular, particular) / 4.0
    l_upper = particular + shift * l_lower

    points.L_lower = l_lower
    points.L = l_upper
    points.condition = condition
    logger.debug("Null frame computed with condition %.3g.", condition)
    return points


def extrinsic_oracle_chi(
    omega: ConformalFactor, h: float = DEFAULT_ORACLE_STEPS[0]
) -> SymTensorField:
    """
    Second fundamental form ``χ_ij = -η(∂_i ∂_j X, L)`` by central differences.

    The embedding is evaluated off the grid through the spectral interpolant of
    ``ω``, so the result depends on the step only through the finite difference
    truncation error, which is ``O(h²)``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param h: Finite difference step in radians.
    :type h: float
    :rtype: SymTensorField
    """
    grid = omega.grid
    theta, phi = grid.theta_mesh, grid.phi_mesh
    frame = null_frame(omega)

    def event(d_theta: float, d_phi: float) -> np.ndarray:
        if d_theta == 0.0 and d_phi == 0.0:
            return frame.events
        t, p = theta + d_theta, phi + d_phi
        unit = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])
        return _events(grid, omega.evaluate(t, p), unit)

    centre = event(0.0, 0.0)
    x_tt = (event(h, 0.0) - 2.0 * centre + event(-h, 0.0)) / h**2
    x_pp = (event(0.0, h) - 2.0 * centre + event(0.0, -h)) / h**2
    x_tp = (event(h, h) - event(h, -h) - event(-h, h) + event(-h, -h)) / (4.0 * h**2)
    return SymTensorField(
        -minkowski_inner(x_tt, frame.L),
        -minkowski_inner(x_tp, frame.L),
        -minkowski_inner(x_pp, frame.L),
        MetricTag.CONFORMAL,
    )


def a_ring_norm2(
    omega: ConformalFactor, quantities: Optional[LightconeQuantities] = None
) -> Field:
    """Pointwise ``|Å|²`` of the cross section."""
    quantities = quantities or lightcone_quantities(omega)
    return gamma_norm2(omega, quantities.A_ring)


def a_norm2(
    omega: ConformalFactor, quantities: Optional[LightconeQuantities] = None
) -> Field:
    """Pointwise ``|A|²`` of the cross section."""
    quantities = quantities or lightcone_quantities(omega)
    return gamma_norm2(omega, quantities.A)

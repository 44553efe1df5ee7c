"""
Steady states module.

The constant curvature cross sections ``ω = c / (√(1 + |a|²) + a·x)``, the
action of Lorentz boosts on cross sections, and the projection of an arbitrary
``ω`` onto that family.

A cross section has ``Å = 0`` exactly when ``1/ω`` is affine in ``x``, so the
family is recognised from the ``l ≤ 1`` harmonic content of ``1/ω``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydanticField, field_validator

from .errors import SteadyStateFitError
from .geometry import ConformalFactor
from .spectral import SphereGrid
from .types import Vector3

logger = logging.getLogger(__name__)

_UNIT_AXIS_TOLERANCE = 1e-9
_Y00 = 1.0 / math.sqrt(4.0 * math.pi)
_Y1 = math.sqrt(3.0 / (4.0 * math.pi))


class SteadyStateParams(BaseModel):
    """
    Parameters of a constant curvature cross section.

    :ivar c: Scale, strictly positive; ``H² = 4 / c²`` on the cross section.
    :type c: float
    :ivar a: Boost parameter in ``ℝ³``.
    :type a: Vector3
    """

    model_config = ConfigDict(frozen=True)

    c: float = PydanticField(default=1.0, gt=0.0, allow_inf_nan=False)
    a: Vector3 = (0.0, 0.0, 0.0)

    @field_validator("a")
    @classmethod
    def _finite(cls, value: Vector3) -> Vector3:
        if not all(math.isfinite(component) for component in value):
            raise ValueError("boost parameter must be finite")
        return value

    @property
    def gamma(self) -> float:
        """Lorentz factor ``√(1 + |a|²)``."""
        return math.sqrt(1.0 + float(np.dot(self.a, self.a)))

    def boost(self) -> "BoostSpec":
        """The boost mapping the round sphere of radius ``c`` to this member."""
        norm = float(np.linalg.norm(self.a))
        if norm == 0.0:
            return BoostSpec()
        return BoostSpec(
            rapidity=math.asinh(norm),
            axis=tuple(float(x) / norm for x in self.a),  # type: ignore[arg-type]
        )


class BoostSpec(BaseModel):
    """
    A Lorentz boost with rapidity ``β`` along the unit axis ``n``.

    The same boosts are parametrized by ``a = sinh(β) n``.

    :ivar rapidity: Rapidity ``β``.
    :type rapidity: float
    :ivar axis: Unit axis ``n``.
    :type axis: Vector3
    """

    model_config = ConfigDict(frozen=True)

    rapidity: float = PydanticField(default=0.0, allow_inf_nan=False)
    axis: Vector3 = (0.0, 0.0, 1.0)

    @field_validator("axis")
    @classmethod
    def _unit(cls, value: Vector3) -> Vector3:
        norm = math.sqrt(sum(component * component for component in value))
        if not math.isfinite(norm) or abs(norm - 1.0) > _UNIT_AXIS_TOLERANCE:
            raise ValueError(f"axis must be a unit vector, got length {norm:g}")
        return value

    @classmethod
    def from_vector(cls, a: Vector3) -> "BoostSpec":
        """The boost with ``sinh(β) n = a``."""
        return SteadyStateParams(c=1.0, a=a).boost()


def mobius_omega(params: SteadyStateParams, grid: SphereGrid) -> ConformalFactor:
    """
    Sample ``ω = c / (√(1 + |a|²) + a·x)`` on ``grid``.

    :param params: Family parameters.
    :type params: SteadyStateParams
    :param grid: The quadrature grid.
    :type grid: SphereGrid
    :rtype: ConformalFactor

    Example::

        omega = mobius_omega(SteadyStateParams(c=1.0, a=(0.0, 0.0, 0.3)), grid)
    """
    a = np.asarray(params.a, dtype=np.float64)
    denominator = params.gamma + np.einsum("i,i...->...", a, grid.cartesian)
    return ConformalFactor(grid, params.c / denominator)


def boost_matrix(boost: BoostSpec) -> np.ndarray:
    """
    Matrix of the boost on ``(t, x¹, x², x³)``.

    ``t' = cosh β t + sinh β n·x`` and ``x' = x + ((cosh β - 1) n·x + sinh β t) n``.
    """
    n = np.asarray(boost.axis, dtype=np.float64)
    ch, sh = math.cosh(boost.rapidity), math.sinh(boost.rapidity)
    matrix = np.eye(4)
    matrix[0, 0] = ch
    matrix[0, 1:] = sh * n
    matrix[1:, 0] = sh * n
    matrix[1:, 1:] += (ch - 1.0) * np.outer(n, n)
    return matrix


def boost_source_points(
    grid: SphereGrid, boost: BoostSpec
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Directions ``x`` whose generators the boost carries onto the grid nodes.

    The inverse boost maps ``(-1, x')`` to ``μ̃ (-1, x)`` with
    ``μ̃ = cosh β + sinh β n·x'``.

    :return: Colatitudes, longitudes and ``μ̃`` at every node.
    :rtype: Tuple[np.ndarray, np.ndarray, np.ndarray]
    """
    n = np.asarray(boost.axis, dtype=np.float64)
    ch, sh = math.cosh(boost.rapidity), math.sinh(boost.rapidity)
    target = grid.cartesian
    along = np.einsum("i,i...->...", n, target)
    scale = ch + sh * along
    source = (target + ((ch - 1.0) * along + sh)[None] * n[:, None, None]) / scale
    theta = np.arccos(np.clip(source[2], -1.0, 1.0))
    phi = np.mod(np.arctan2(source[1], source[0]), 2.0 * np.pi)
    return theta, phi, scale


def boost_cross_section(omega: ConformalFactor, boost: BoostSpec) -> ConformalFactor:
    """
    Image of the cross section ``r = ω`` under a Lorentz boost.

    The boost maps the event ``ω(x)(-1, x)`` to ``ω(x)/μ̃ (-1, x')``, so the image
    is ``ω'(x') = ω(x) / μ̃``, with ``ω`` evaluated off the grid spectrally.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param boost: The boost.
    :type boost: BoostSpec
    :rtype: ConformalFactor
    """
    if boost.rapidity == 0.0:
        return ConformalFactor(omega.grid, omega.values.copy())
    theta, phi, scale = boost_source_points(omega.grid, boost)
    return ConformalFactor(omega.grid, omega.evaluate(theta, phi) / scale)


@dataclass
class SteadyStateFit:
    """
    Projection of ``1/ω`` onto the constant curvature family.

    :ivar params: Reconstructed family parameters.
    :vartype params: SteadyStateParams
    :ivar residual: Relative squared norm of the ``l ≥ 2`` part of ``1/ω``.
    :vartype residual: float
    """

    params: SteadyStateParams
    residual: float

    def __iter__(self):
        return iter((self.params, self.residual))


def fit_constant_curvature(omega: ConformalFactor) -> SteadyStateFit:
    """
    Fit ``ω`` to the constant curvature family from the harmonics of ``1/ω``.

    On the family ``1/ω = (√(1 + |a|²) + a·x) / c``, so the ``l = 0`` coefficient
    gives ``√(1 + |a|²)/c`` and the ``l = 1`` block gives ``a/c``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :raises SteadyStateFitError: If the affine part of ``1/ω`` is not timelike.
    :rtype: SteadyStateFit
    """
    grid = omega.grid
    coeffs = grid.analyze(1.0 / omega.values, grid.L_max)
    lb = grid.L_max
    constant = coeffs[0, lb] * _Y00
    linear = np.array([coeffs[1, lb + 1], coeffs[1, lb - 1], coeffs[1, lb]]) * _Y1
    discriminant = constant * constant - float(np.dot(linear, linear))
    if constant <= 0.0 or discriminant <= 0.0:
        raise SteadyStateFitError(
            f"Affine part of 1/ω is not timelike (s² - |b|² = {discriminant:.3g})."
        )
    c = 1.0 / math.sqrt(discriminant)
    total = float(np.sum(coeffs**2))
    residual = float(np.sum(coeffs[2:] ** 2)) / total
    params = SteadyStateParams(c=c, a=tuple(float(x) for x in c * linear))  # type: ignore[arg-type]
    logger.debug("Fitted c=%.12g, a=%s, residual=%.3g.", c, params.a, residual)
    return SteadyStateFit(params=params, residual=residual)

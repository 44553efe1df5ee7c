"""
Initial data module.
"""

import enum
import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydanticField, model_validator

from .errors import InitialDataError, NonPositiveFactorError
from .geometry import ConformalFactor, null_expansion
from .spectral import SphereGrid
from .steady import SteadyStateParams, mobius_omega
from .types import Perturbation, Vector3

logger = logging.getLogger(__name__)


class InitialKind(str, enum.Enum):
    """Kinds of initial conformal factor."""

    ROUND = "round"
    """``ω ≡ c``."""

    MOBIUS = "mobius"
    """A member of the constant curvature family."""

    RANDOM = "random"
    """``c (1 + Σ ε_lm Y_lm)`` with seeded coefficients and positive curvature."""

    PERTURBED = "perturbed"
    """``c (1 + Σ ε Y_lm)`` for an explicit list of ``(l, m, ε)``."""

    FILE = "file"
    """Read from a snapshot file."""


class InitialSpec(BaseModel):
    """
    Description of the initial conformal factor.

    :ivar kind: Which construction to use.
    :type kind: InitialKind
    :ivar c: Scale ``c > 0``.
    :type c: float
    :ivar a: Boost parameter of the ``mobius`` kind.
    :type a: Vector3
    :ivar amplitude: Coefficient scale of the ``random`` kind.
    :type amplitude: float
    :ivar max_degree: Highest perturbed degree ``l₀`` of the ``random`` kind.
    :type max_degree: int
    :ivar max_attempts: Resampling budget of the ``random`` kind.
    :type max_attempts: int
    :ivar perturbations: ``(l, m, ε)`` terms of the ``perturbed`` kind.
    :type perturbations: Tuple[Perturbation, ...]
    :ivar path: Snapshot file of the ``file`` kind.
    :type path: Optional[Path]
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: InitialKind = InitialKind.ROUND
    c: float = PydanticField(default=1.0, gt=0.0, allow_inf_nan=False)
    a: Vector3 = (0.0, 0.0, 0.0)
    amplitude: float = PydanticField(default=0.05, ge=0.0, allow_inf_nan=False)
    max_degree: int = PydanticField(default=4, ge=2)
    max_attempts: int = PydanticField(default=100, ge=1)
    perturbations: Tuple[Perturbation, ...] = ()
    path: Optional[Path] = None

    @model_validator(mode="after")
    def _consistent(self) -> "InitialSpec":
        if self.kind is InitialKind.FILE and self.path is None:
            raise ValueError("initial.path is required for kind 'file'")
        for l, m, _ in self.perturbations:
            if l < 0 or abs(m) > l:
                raise ValueError(f"invalid harmonic ({l}, {m})")
        return self


def harmonic_sum(grid: SphereGrid, terms: Tuple[Perturbation, ...]) -> np.ndarray:
    """Sample ``Σ ε Y_lm`` at the nodes."""
    total = np.zeros(grid.shape)
    for l, m, eps in terms:
        total = total + eps * grid.ylm(l, m)
    return total


def perturbed_omega(
    grid: SphereGrid, c: float, perturbations: Tuple[Perturbation, ...]
) -> ConformalFactor:
    """
    ``ω = c (1 + Σ ε Y_lm)``.

    :raises InitialDataError: If the perturbation makes ``ω`` non-positive.
    """
    values = c * (1.0 + harmonic_sum(grid, perturbations))
    try:
        return ConformalFactor(grid, values)
    except NonPositiveFactorError as ex:
        raise InitialDataError(f"Perturbed initial data is not positive: {ex}") from ex


def scalar_curvature_positive(omega: ConformalFactor) -> bool:
    """Whether ``R = θ / ω`` is strictly positive at every node."""
    return bool(np.all(null_expansion(omega) > 0.0))


def random_omega(
    grid: SphereGrid,
    rng: np.random.Generator,
    c: float = 1.0,
    amplitude: float = 0.05,
    max_degree: int = 4,
    max_attempts: int = 100,
) -> ConformalFactor:
    """
    Random admissible initial data ``c (1 + Σ_{2 ≤ l ≤ l₀} ε_lm Y_lm)``.

    Coefficients are drawn as ``amplitude · N(0, 1) / l`` and the sample is
    redrawn until ``ω > 0`` and ``R > 0`` at every node.

    :raises InitialDataError: If no admissible sample is found.
    """
    max_degree = min(max_degree, grid.L)
    for attempt in range(1, max_attempts + 1):
        terms = tuple(
            (l, m, amplitude * float(rng.standard_normal()) / l)
            for l in range(2, max_degree + 1)
            for m in range(-l, l + 1)
        )
        values = c * (1.0 + harmonic_sum(grid, terms))
        if np.any(values <= 0.0):
            continue
        omega = ConformalFactor(grid, values)
        if scalar_curvature_positive(omega):
            logger.debug("Random initial data accepted after %d attempt(s).", attempt)
            return omega
    raise InitialDataError(
        f"No random initial data with positive curvature after {max_attempts} attempts."
    )


def initial_omega(
    spec: InitialSpec, grid: SphereGrid, seed: Optional[int] = None
) -> ConformalFactor:
    """
    Build the initial conformal factor described by ``spec``.

    :param spec: The description.
    :type spec: InitialSpec
    :param grid: The quadrature grid.
    :type grid: SphereGrid
    :param seed: Seed of the ``random`` kind.
    :type seed: Optional[int]
    :rtype: ConformalFactor
    """
    if spec.kind is InitialKind.ROUND:
        return ConformalFactor.constant(grid, spec.c)
    if spec.kind is InitialKind.MOBIUS:
        return mobius_omega(SteadyStateParams(c=spec.c, a=spec.a), grid)
    if spec.kind is InitialKind.PERTURBED:
        return perturbed_omega(grid, spec.c, spec.perturbations)
    if spec.kind is InitialKind.RANDOM:
        return random_omega(
            grid,
            np.random.default_rng(seed),
            c=spec.c,
            amplitude=spec.amplitude,
            max_degree=spec.max_degree,
            max_attempts=spec.max_attempts,
        )

    from .serialization import read_snapshot  # pylint: disable=import-outside-toplevel

    snapshot = read_snapshot(spec.path)  # type: ignore[arg-type]
    if snapshot.values.shape != grid.shape:
        raise InitialDataError(
            f"Snapshot of shape {snapshot.values.shape} does not match {grid}."
        )
    return ConformalFactor(grid, snapshot.values)


STANDARD_PERTURBATION: Tuple[Perturbation, ...] = ((2, 0, 0.05), (3, 1, 0.03))
"""The perturbation ``0.05 Y_20 + 0.03 Y_31`` used by the convergence studies."""


def standard_perturbed(grid: SphereGrid) -> ConformalFactor:
    """``1 + 0.05 Y_20 + 0.03 Y_31``."""
    return perturbed_omega(grid, 1.0, STANDARD_PERTURBATION)

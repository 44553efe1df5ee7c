"""
Sphere spectral module.

Quadrature grid on the unit sphere (Gauss-Legendre nodes in ``cos θ`` times
equispaced longitudes), analysis and synthesis in real fully normalized
spherical harmonics, and the differential operators of the round metric
``dΩ² = dθ² + sin²θ dφ²``.

Harmonic conventions: ``Y_l0 = P̃_l0(cos θ)``, ``Y_lm = √2 P̃_lm cos(mφ)`` and
``Y_l,-m = √2 P̃_lm sin(mφ)`` for ``m > 0``, where ``P̃_lm`` are associated
Legendre functions without the Condon-Shortley phase, normalized so that
``∫ Y_lm² dΩ = 1``.
"""

import enum
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from .errors import BandlimitError, GridError
from .types import Coefficients, Field

logger = logging.getLogger(__name__)

_EVALUATE_CHUNK = 2048


def normalized_legendre(
    lmax: int, x: np.ndarray, derivatives: int = 0
) -> Tuple[np.ndarray, ...]:
    """
    Fully normalized associated Legendre functions and their ``θ`` derivatives.

    Returns arrays of shape ``(lmax + 1, lmax + 1) + x.shape`` indexed ``[l, m]``,
    zero where ``m > l``. The first array holds ``P̃_lm(x)``; with
    ``derivatives`` of 1 or 2 the tuple also holds ``dP̃/dθ`` and ``d²P̃/dθ²``
    (with ``x = cos θ``), which require ``|x| < 1``.

    :param lmax: Highest degree.
    :type lmax: int
    :param x: Points ``cos θ``.
    :type x: np.ndarray
    :param derivatives: Number of ``θ`` derivatives to return, 0 to 2.
    :type derivatives: int
    :return: ``(P,)``, ``(P, dP)`` or ``(P, dP, d2P)``.
    :rtype: Tuple[np.ndarray, ...]
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    p = np.zeros((lmax + 1, lmax + 1) + x.shape)

    pmm = np.full(x.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(lmax + 1):
        if m > 0:
            pmm = pmm * s * math.sqrt((2.0 * m + 1.0) / (2.0 * m))
        p[m, m] = pmm
        if m < lmax:
            p[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * pmm
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[l, m] = a * (x * p[l - 1, m] - b * p[l - 2, m])

    if derivatives == 0:
        return (p,)

    degree = np.arange(lmax + 1, dtype=np.float64)
    order = np.arange(lmax + 1, dtype=np.float64)
    ll, mm = np.meshgrid(degree, order, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        coupling = np.where(
            ll > mm,
            np.sqrt((2.0 * ll + 1.0) / (2.0 * ll - 1.0) * (ll * ll - mm * mm)),
            0.0,
        )
    expand = (slice(None), slice(None)) + (None,) * x.ndim
    previous = np.zeros_like(p)
    previous[1:] = p[:-1]
    dp = (ll[expand] * x * p - coupling[expand] * previous) / s
    if derivatives == 1:
        return p, dp

    d2p = -(x / s) * dp - (ll[expand] * (ll[expand] + 1.0) - mm[expand] ** 2 / s**2) * p
    return p, dp, d2p


def _split(coeffs: Coefficients) -> Tuple[np.ndarray, np.ndarray]:
    """Split ``[l, m + L]`` storage into cosine and sine blocks indexed ``[l, m]``."""
    bandlimit = coeffs.shape[-2] - 1
    cosine = coeffs[..., bandlimit:]
    sine = np.zeros_like(cosine)
    sine[..., 1:] = coeffs[..., :bandlimit][..., ::-1]
    return cosine, sine


def _merge(cosine: np.ndarray, sine: np.ndarray) -> Coefficients:
    bandlimit = cosine.shape[-1] - 1
    coeffs = np.zeros(cosine.shape[:-1] + (2 * bandlimit + 1,))
    coeffs[..., bandlimit:] = cosine
    coeffs[..., :bandlimit] = sine[..., 1:][..., ::-1]
    return coeffs


def _order_factors(bandlimit: int) -> np.ndarray:
    factors = np.full(bandlimit + 1, math.sqrt(2.0))
    factors[0] = 1.0
    return factors


def bandlimit_of(coeffs: Coefficients) -> int:
    """
    Bandlimit encoded in the shape of a coefficient array.

    :param coeffs: Coefficient array with trailing axes ``(L + 1, 2L + 1)``.
    :type coeffs: Coefficients
    :return: The bandlimit ``L``.
    :rtype: int
    :raises BandlimitError: If the trailing axes are inconsistent.
    """
    if coeffs.ndim < 2 or coeffs.shape[-1] != 2 * coeffs.shape[-2] - 1:
        raise BandlimitError(
            f"Coefficient array of shape {coeffs.shape} is not (L+1, 2L+1)."
        )
    return coeffs.shape[-2] - 1


class MetricTag(enum.Enum):
    """Metric used to raise indices of a tensor field."""

    ROUND = "round"
    """The round metric ``dΩ²`` of the unit sphere."""

    CONFORMAL = "conformal"
    """The conformal metric ``γ = ω² dΩ²`` of a cross section."""


@dataclass
class VectorFieldSph:
    """
    Coordinate components of a vector field or one-form on the sphere.

    :ivar theta: The ``θ`` component.
    :type theta: Field
    :ivar phi: The ``φ`` component.
    :type phi: Field
    :ivar covariant: Whether the components are covariant (one-form) or
        contravariant (vector) with respect to ``(∂_θ, ∂_φ)``.
    :type covariant: bool
    """

    theta: Field
    phi: Field
    covariant: bool = False

    def lowered(self, grid: "SphereGrid") -> "VectorFieldSph":
        """Covariant components with respect to the round metric."""
        if self.covariant:
            return self
        return VectorFieldSph(self.theta, self.phi * grid.sin_theta_mesh**2, True)

    def raised(self, grid: "SphereGrid") -> "VectorFieldSph":
        """Contravariant components with respect to the round metric."""
        if not self.covariant:
            return self
        return VectorFieldSph(self.theta, self.phi / grid.sin_theta_mesh**2, False)

    def norm2_round(self, grid: "SphereGrid") -> Field:
        """Pointwise squared length with respect to ``dΩ²``."""
        s2 = grid.sin_theta_mesh**2
        if self.covariant:
            return self.theta**2 + self.phi**2 / s2
        return self.theta**2 + s2 * self.phi**2

    def as_array(self) -> np.ndarray:
        """Components stacked along a leading axis of length 2."""
        return np.stack([self.theta, self.phi])


@dataclass
class SymTensorField:
    """
    Covariant coordinate components of a symmetric ``(0, 2)`` tensor field.

    :ivar tt: The ``θθ`` component.
    :type tt: Field
    :ivar tp: The ``θφ`` component, stored once.
    :type tp: Field
    :ivar pp: The ``φφ`` component.
    :type pp: Field
    :ivar metric: Metric the tensor is meant to be contracted with.
    :type metric: MetricTag
    """

    tt: Field
    tp: Field
    pp: Field
    metric: MetricTag = MetricTag.CONFORMAL

    @classmethod
    def from_array(
        cls, array: np.ndarray, metric: MetricTag = MetricTag.CONFORMAL
    ) -> "SymTensorField":
        """Build from a ``(2, 2, ...)`` component array, symmetrizing it."""
        return cls(
            array[0, 0], 0.5 * (array[0, 1] + array[1, 0]), array[1, 1], metric
        )

    def as_array(self) -> np.ndarray:
        """Components as a symmetric ``(2, 2, ...)`` array."""
        return np.stack([np.stack([self.tt, self.tp]), np.stack([self.tp, self.pp])])

    def _combine(self, other: "SymTensorField", sign: float) -> "SymTensorField":
        return SymTensorField(
            self.tt + sign * other.tt,
            self.tp + sign * other.tp,
            self.pp + sign * other.pp,
            self.metric,
        )

    def __add__(self, other: "SymTensorField") -> "SymTensorField":
        return self._combine(other, 1.0)

    def __sub__(self, other: "SymTensorField") -> "SymTensorField":
        return self._combine(other, -1.0)

    def __mul__(self, factor: Union[float, Field]) -> "SymTensorField":
        return SymTensorField(
            self.tt * factor, self.tp * factor, self.pp * factor, self.metric
        )

    __rmul__ = __mul__

    def __neg__(self) -> "SymTensorField":
        return self * -1.0


@dataclass
class Tensor3Field:
    """
    Covariant coordinate components of a ``(0, 3)`` tensor field such as ``∇T``.

    :ivar components: Array of shape ``(2, 2, 2, N_θ, N_φ)``; the first index is
        the derivative slot.
    :type components: np.ndarray
    """

    components: np.ndarray

    def antisymmetrized(self) -> "Tensor3Field":
        """The tensor ``T_ijk - T_jik`` (first two slots exchanged)."""
        return Tensor3Field(self.components - np.swapaxes(self.components, 0, 1))

    def __sub__(self, other: "Tensor3Field") -> "Tensor3Field":
        return Tensor3Field(self.components - other.components)

    def __add__(self, other: "Tensor3Field") -> "Tensor3Field":
        return Tensor3Field(self.components + other.components)


@dataclass
class RoundDerivatives:
    """Partial derivatives of a scalar field in ``(θ, φ)`` coordinates."""

    d_theta: Field
    d_phi: Field
    d_theta2: Field
    d_theta_phi: Field
    d_phi2: Field


@dataclass
class HarmonicCoeffs:
    """
    Real fully normalized spherical harmonic coefficients.

    :ivar values: Coefficient array, ``c[l, m]`` at index ``[l, m + L]``.
    :type values: Coefficients
    """

    values: Coefficients

    @property
    def bandlimit(self) -> int:
        """The bandlimit ``L`` of the expansion."""
        return bandlimit_of(self.values)

    def __getitem__(self, index: Tuple[int, int]) -> float:
        l, m = index
        if abs(m) > l or l > self.bandlimit:
            raise BandlimitError(f"No coefficient ({l}, {m}) at bandlimit {self.bandlimit}.")
        return float(self.values[..., l, m + self.bandlimit])

    def norm2(self) -> float:
        """Sum of squared coefficients, equal to ``∫ f² dΩ`` by Parseval."""
        return float(np.sum(self.values**2))


class SphereGrid:
    """
    Gauss-Legendre by equiangular quadrature grid with state bandlimit ``L``.

    ``N_θ = ceil(oversample (L + 1))`` colatitudes are the Gauss-Legendre nodes in
    ``cos θ``, sorted by increasing ``θ``, so no node lies on a pole.
    ``N_φ = ceil(oversample (2L + 1))`` longitudes are ``φ_j = 2πj / N_φ``.
    Besides the state bandlimit the grid resolves harmonics up to
    ``L_max = min(N_θ - 1, (N_φ - 1) // 2)``, which the derivative operators use by
    default so that products of bandlimited fields are differentiated with
    little truncation.

    :param L: Bandlimit of the state, at least 4.
    :type L: int
    :param oversample: Oversampling factor, at least 1.
    :type oversample: float

    Example::

        grid = SphereGrid(16)
        f = grid.cartesian[2] ** 2
        assert abs(grid.integrate(f) - 4 * math.pi / 3) < 1e-13
    """

    def __init__(self, L: int, oversample: float = 2.0):
        if isinstance(L, bool) or int(L) != L:
            raise GridError(f"Bandlimit must be an integer, got {L!r}.")
        if L < 4:
            raise GridError(f"Bandlimit must be ≥ 4, got {L}.")
        if not math.isfinite(oversample) or oversample < 1:
            raise GridError(f"Oversample factor must be finite and ≥ 1, got {oversample}.")

        self.L = int(L)
        self.oversample = float(oversample)
        self.n_theta = math.ceil(self.oversample * (self.L + 1) - 1e-9)
        self.n_phi = math.ceil(self.oversample * (2 * self.L + 1) - 1e-9)
        self.L_max = min(self.n_theta - 1, (self.n_phi - 1) // 2)

        nodes, weights = np.polynomial.legendre.leggauss(self.n_theta)
        self.cos_theta: np.ndarray = nodes[::-1].copy()
        self.weights: np.ndarray = weights[::-1].copy()
        self.theta: np.ndarray = np.arccos(self.cos_theta)
        self.sin_theta: np.ndarray = np.sin(self.theta)
        self.phi: np.ndarray = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        self.d_phi = 2.0 * np.pi / self.n_phi

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}("
            f"L={self.L},"
            f"oversample={self.oversample:g},"
            f"n_theta={self.n_theta},"
            f"n_phi={self.n_phi},"
            ")"
        )

    __str__ = __repr__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SphereGrid):
            return NotImplemented
        return (self.L, self.oversample) == (other.L, other.oversample)

    def __hash__(self) -> int:
        return hash((self.L, self.oversample))

    @property
    def shape(self) -> Tuple[int, int]:
        """Shape ``(N_θ, N_φ)`` of a scalar field."""
        return self.n_theta, self.n_phi

    @cached_property
    def theta_mesh(self) -> Field:
        return np.broadcast_to(self.theta[:, None], self.shape).copy()

    @cached_property
    def phi_mesh(self) -> Field:
        return np.broadcast_to(self.phi[None, :], self.shape).copy()

    @cached_property
    def sin_theta_mesh(self) -> Field:
        return np.broadcast_to(self.sin_theta[:, None], self.shape).copy()

    @cached_property
    def cos_theta_mesh(self) -> Field:
        return np.broadcast_to(self.cos_theta[:, None], self.shape).copy()

    @cached_property
    def cartesian(self) -> np.ndarray:
        """Unit vectors ``x(θ, φ)`` at the nodes, shape ``(3, N_θ, N_φ)``."""
        s, c, p = self.sin_theta_mesh, self.cos_theta_mesh, self.phi_mesh
        return np.stack([s * np.cos(p), s * np.sin(p), c])

    @cached_property
    def e_theta(self) -> np.ndarray:
        """``∂_θ x``, a unit tangent vector, shape ``(3, N_θ, N_φ)``."""
        s, c, p = self.sin_theta_mesh, self.cos_theta_mesh, self.phi_mesh
        return np.stack([c * np.cos(p), c * np.sin(p), -s])

    @cached_property
    def e_phi(self) -> np.ndarray:
        """``∂_φ x``, a tangent vector of length ``sin θ``, shape ``(3, N_θ, N_φ)``."""
        s, p = self.sin_theta_mesh, self.phi_mesh
        return np.stack([-s * np.sin(p), s * np.cos(p), np.zeros(self.shape)])

    @cached_property
    def frame(self) -> np.ndarray:
        """Coordinate tangent vectors ``(∂_θ x, ∂_φ x)``, shape ``(2, 3, N_θ, N_φ)``."""
        return np.stack([self.e_theta, self.e_phi])

    @cached_property
    def coframe(self) -> np.ndarray:
        """Tangent vectors dual to :attr:`frame` under the Euclidean product."""
        return np.stack([self.e_theta, self.e_phi / self.sin_theta_mesh**2])

    @cached_property
    def inverse_round_metric(self) -> np.ndarray:
        """Diagonal of ``g₀⁻¹``, shape ``(2, N_θ, N_φ)``."""
        return np.stack([np.ones(self.shape), 1.0 / self.sin_theta_mesh**2])

    @cached_property
    def _tables(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        logger.debug("Building Legendre tables for %s.", self)
        p, dp, d2p = normalized_legendre(self.L_max, self.cos_theta, derivatives=2)
        return p, dp, d2p

    def resolve_bandlimit(self, bandlimit: Optional[int]) -> int:
        """
        Validate a requested bandlimit, defaulting to the state bandlimit.

        :raises BandlimitError: If it exceeds what the grid resolves.
        """
        if bandlimit is None:
            return self.L
        if bandlimit < 0 or bandlimit > self.L_max:
            raise BandlimitError(
                f"Bandlimit {bandlimit} outside the range 0..{self.L_max} of {self}."
            )
        return int(bandlimit)

    def check_field(self, f: np.ndarray) -> np.ndarray:
        """
        Validate that ``f`` is a finite field (or batch of fields) on this grid.

        :raises GridError: On shape mismatch or non-finite entries.
        """
        f = np.asarray(f, dtype=np.float64)
        if f.shape[-2:] != self.shape:
            raise GridError(f"Field of shape {f.shape} does not match {self}.")
        if not np.all(np.isfinite(f)):
            raise GridError("Field has non-finite entries.")
        return f

    def analyze(self, f: Field, bandlimit: Optional[int] = None) -> Coefficients:
        """
        Harmonic coefficients of a sampled field, exact for fields of degree at
        most ``L_max``.

        :param f: Field, possibly with leading batch axes.
        :type f: Field
        :param bandlimit: Highest degree kept, defaults to ``L``.
        :type bandlimit: Optional[int]
        :return: Coefficients of shape ``(..., bandlimit + 1, 2 bandlimit + 1)``.
        :rtype: Coefficients
        """
        f = self.check_field(f)
        lb = self.resolve_bandlimit(bandlimit)
        p = self._tables[0][: lb + 1, : lb + 1]
        spectrum = np.fft.rfft(f, axis=-1)[..., : lb + 1]
        scale = _order_factors(lb) * self.d_phi
        w = self.weights[:, None]
        cosine = np.einsum("...im,lmi->...lm", spectrum.real * w, p) * scale
        sine = np.einsum("...im,lmi->...lm", -spectrum.imag * w, p) * scale
        sine[..., 0] = 0.0
        return _merge(cosine, sine)

    def synthesize(self, coeffs: Coefficients, dtheta: int = 0, dphi: int = 0) -> Field:
        """
        Sample an expansion (or its partial derivatives) at the nodes.

        :param coeffs: Coefficients with trailing axes ``(L' + 1, 2L' + 1)``,
            ``L' ≤ L_max``.
        :type coeffs: Coefficients
        :param dtheta: Order of the ``θ`` derivative, 0 to 2.
        :type dtheta: int
        :param dphi: Order of the ``φ`` derivative.
        :type dphi: int
        :return: Field values of shape ``(..., N_θ, N_φ)``.
        :rtype: Field
        """
        coeffs = np.asarray(coeffs, dtype=np.float64)
        lb = bandlimit_of(coeffs)
        if lb > self.L_max:
            raise BandlimitError(
                f"Coefficients of bandlimit {lb} exceed the resolution of {self}."
            )
        table = self._tables[dtheta][: lb + 1, : lb + 1]
        cosine, sine = _split(coeffs)
        factors = _order_factors(lb)
        a = np.einsum("...lm,lmi->...im", cosine, table) * factors
        b = np.einsum("...lm,lmi->...im", sine, table) * factors
        z = a - 1j * b
        if dphi:
            z = z * (1j * np.arange(lb + 1)) ** dphi
        spectrum = np.zeros(z.shape[:-1] + (self.n_phi // 2 + 1,), dtype=np.complex128)
        spectrum[..., : lb + 1] = 0.5 * self.n_phi * z
        spectrum[..., 0] = self.n_phi * z[..., 0]
        return np.fft.irfft(spectrum, n=self.n_phi, axis=-1)

    def project(self, f: Field, bandlimit: Optional[int] = None) -> Field:
        """Re-sample ``f`` after truncating its expansion at ``bandlimit``."""
        return self.synthesize(self.analyze(f, bandlimit))

    def integrate(self, f: Field) -> Union[float, np.ndarray]:
        """
        Quadrature ``Σ_ij f_ij w_i 2π/N_φ`` over the sphere.

        :param f: Field, possibly with leading batch axes.
        :type f: Field
        :return: The integral, one per batch entry.
        :rtype: Union[float, np.ndarray]
        """
        f = self.check_field(f)
        total = np.sum(f * self.weights[:, None], axis=(-2, -1)) * self.d_phi
        return float(total) if np.ndim(total) == 0 else total

    def mean(self, f: Field, weight: Optional[Field] = None) -> float:
        """Average of ``f`` over the sphere, optionally against a density."""
        if weight is None:
            return float(self.integrate(f)) / (4.0 * math.pi)
        return float(self.integrate(f * weight)) / float(self.integrate(weight))

    def evaluate(
        self, coeffs: Coefficients, theta: np.ndarray, phi: np.ndarray
    ) -> np.ndarray:
        """
        Evaluate an expansion at arbitrary points by direct summation.

        :param coeffs: Coefficients, possibly with leading batch axes.
        :type coeffs: Coefficients
        :param theta: Colatitudes.
        :type theta: np.ndarray
        :param phi: Longitudes, broadcastable against ``theta``.
        :type phi: np.ndarray
        :return: Values of shape ``batch + broadcast(theta, phi).shape``.
        :rtype: np.ndarray
        """
        coeffs = np.asarray(coeffs, dtype=np.float64)
        lb = bandlimit_of(coeffs)
        theta, phi = np.broadcast_arrays(
            np.asarray(theta, dtype=np.float64), np.asarray(phi, dtype=np.float64)
        )
        points = theta.shape
        theta, phi = theta.ravel(), phi.ravel()
        cosine, sine = _split(coeffs)
        factors = _order_factors(lb)
        orders = np.arange(lb + 1)[:, None]
        out = np.empty(coeffs.shape[:-2] + (theta.size,))
        for start in range(0, theta.size, _EVALUATE_CHUNK):
            chunk = slice(start, start + _EVALUATE_CHUNK)
            (p,) = normalized_legendre(lb, np.cos(theta[chunk]))
            a = np.einsum("...lm,lmp->...mp", cosine, p) * factors[:, None]
            b = np.einsum("...lm,lmp->...mp", sine, p) * factors[:, None]
            angle = orders * phi[chunk][None, :]
            out[..., chunk] = np.einsum("...mp,mp->...p", a, np.cos(angle)) + np.einsum(
                "...mp,mp->...p", b, np.sin(angle)
            )
        return out.reshape(coeffs.shape[:-2] + points)

    def ylm(self, l: int, m: int) -> Field:
        """Sample the real harmonic ``Y_lm`` at the nodes."""
        if abs(m) > l or l > self.L_max:
            raise BandlimitError(f"Harmonic ({l}, {m}) not resolved by {self}.")
        coeffs = np.zeros((l + 1, 2 * l + 1))
        coeffs[l, m + l] = 1.0
        return self.synthesize(coeffs)

    def partials(
        self, f: Field, bandlimit: Optional[int] = None
    ) -> Tuple[Field, Field]:
        """First partial derivatives ``(∂_θ f, ∂_φ f)``, defaulting to ``L_max``."""
        coeffs = self.analyze(f, self.L_max if bandlimit is None else bandlimit)
        return self.synthesize(coeffs, dtheta=1), self.synthesize(coeffs, dphi=1)

    def derivatives(self, f: Field, bandlimit: Optional[int] = None) -> RoundDerivatives:
        """All partial derivatives of orders one and two, from one analysis."""
        coeffs = self.analyze(f, self.L_max if bandlimit is None else bandlimit)
        return RoundDerivatives(
            d_theta=self.synthesize(coeffs, dtheta=1),
            d_phi=self.synthesize(coeffs, dphi=1),
            d_theta2=self.synthesize(coeffs, dtheta=2),
            d_theta_phi=self.synthesize(coeffs, dtheta=1, dphi=1),
            d_phi2=self.synthesize(coeffs, dphi=2),
        )

    def laplacian0(self, f: Field, bandlimit: Optional[int] = None) -> Field:
        """
        Round Laplacian ``Δ₀ f`` by the spectral multiplier ``-l(l + 1)``.

        :param f: Field, possibly batched.
        :type f: Field
        :param bandlimit: Resolution of the expansion, defaults to ``L_max``.
        :type bandlimit: Optional[int]
        :rtype: Field

        Example::

            z = grid.cartesian[2]
            grid.laplacian0(z ** 2)  # == 2 - 6 z²
        """
        coeffs = self.analyze(f, self.L_max if bandlimit is None else bandlimit)
        degree = np.arange(coeffs.shape[-2], dtype=np.float64)
        return self.synthesize(coeffs * -(degree * (degree + 1.0))[:, None])

    def gradient0(self, f: Field, bandlimit: Optional[int] = None) -> VectorFieldSph:
        """Round gradient as contravariant components ``(∂_θ f, ∂_φ f / sin²θ)``."""
        d_theta, d_phi = self.partials(f, bandlimit)
        return VectorFieldSph(d_theta, d_phi / self.sin_theta_mesh**2, covariant=False)

    def hessian0(self, f: Field, bandlimit: Optional[int] = None) -> SymTensorField:
        """
        Round covariant Hessian using ``Γ^θ_φφ = -sin θ cos θ`` and
        ``Γ^φ_θφ = cot θ``.
        """
        d = self.derivatives(f, bandlimit)
        s, c = self.sin_theta_mesh, self.cos_theta_mesh
        return SymTensorField(
            tt=d.d_theta2,
            tp=d.d_theta_phi - (c / s) * d.d_phi,
            pp=d.d_phi2 + s * c * d.d_theta,
            metric=MetricTag.ROUND,
        )

    def spectral_norm(self, f: Field, k: int, bandlimit: Optional[int] = None) -> float:
        """Sobolev-type seminorm ``Σ_lm l^{2k} c_lm²`` of ``f``."""
        coeffs = self.analyze(f, bandlimit)
        degree = np.arange(coeffs.shape[-2], dtype=np.float64)
        return float(np.sum(degree[:, None] ** (2 * k) * coeffs**2))


class Direction(enum.Enum):
    """Direction of a spherical harmonic transform."""

    ANALYZE = "analyze"
    """Field samples to coefficients."""

    SYNTHESIZE = "synthesize"
    """Coefficients to field samples."""


def build_grid(L: int, oversample: float = 2.0) -> SphereGrid:
    """
    Build a quadrature grid with bandlimit ``L``.

    :raises GridError: If ``L < 4`` or ``oversample < 1`` or either is not finite.
    """
    return SphereGrid(L, oversample)


def sh_transform(
    grid: SphereGrid,
    data: Union[Field, HarmonicCoeffs],
    direction: Direction,
    bandlimit: Optional[int] = None,
) -> Union[HarmonicCoeffs, Field]:
    """
    Forward or inverse spherical harmonic transform on ``grid``.

    :param grid: The quadrature grid.
    :type grid: SphereGrid
    :param data: Field samples to analyze, or coefficients to synthesize.
    :type data: Union[Field, HarmonicCoeffs]
    :param direction: Transform direction.
    :type direction: Direction
    :param bandlimit: Bandlimit of the analysis, defaults to the grid's ``L``.
    :type bandlimit: Optional[int]
    :raises BandlimitError: If the coefficients exceed the grid resolution.
    """
    if direction is Direction.ANALYZE:
        if isinstance(data, HarmonicCoeffs):
            raise BandlimitError("Cannot analyze coefficients; expected field samples.")
        return HarmonicCoeffs(grid.analyze(data, bandlimit))
    values = data.values if isinstance(data, HarmonicCoeffs) else np.asarray(data)
    if bandlimit_of(values) > grid.L:
        raise BandlimitError(
            f"Coefficients of bandlimit {bandlimit_of(values)} exceed grid bandlimit {grid.L}."
        )
    return grid.synthesize(values)

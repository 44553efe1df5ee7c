"""
Conformal calculus module.

Differential operators of the conformal metric ``γ = ω² dΩ²`` on the sphere,
written in spherical coordinate components on the pole-free grid.

Covariant derivatives of the round metric are computed without coordinate
Christoffel symbols: a covariant tensor is lifted to its ambient Cartesian
components with the coframe, each (smooth) Cartesian component is
differentiated spectrally, and the result is contracted back with the
coordinate frame. The connection of ``γ`` then differs from the round one by the
two dimensional conformal rule
``C^l_ij = δ^l_i u_j + δ^l_j u_i - g₀_ij g₀^lm u_m`` with ``u = log ω``.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

from .spectral import MetricTag, SphereGrid, SymTensorField, Tensor3Field, VectorFieldSph
from .types import Field

if TYPE_CHECKING:
    from .geometry import ConformalFactor

_SLOT_LETTERS = "abcd"
_CARTESIAN_LETTERS = "pqrs"


@dataclass
class ConformalScalarOps:
    """
    Scalar operators of ``γ`` applied to one function.

    :ivar laplacian: ``Δ_γ f``.
    :type laplacian: Field
    :ivar grad_norm2: ``|∇f|²_γ``.
    :type grad_norm2: Field
    :ivar hessian: ``Hess_γ f``.
    :type hessian: SymTensorField
    """

    laplacian: Field
    grad_norm2: Field
    hessian: SymTensorField


def _lift_spec(rank: int) -> str:
    slots = _SLOT_LETTERS[:rank]
    cart = _CARTESIAN_LETTERS[:rank]
    frames = ",".join(f"{i}{a}xy" for i, a in zip(slots, cart))
    return f"{slots}xy,{frames}->{cart}xy"


def _lower_spec(rank: int) -> str:
    slots = _SLOT_LETTERS[:rank]
    cart = _CARTESIAN_LETTERS[:rank]
    frames = ",".join(f"{a}{i}xy" for i, a in zip(slots, cart))
    return f"k{cart}xy,{frames}->k{slots}xy"


def round_covariant_derivative(
    grid: SphereGrid, tensor: np.ndarray, bandlimit: Optional[int] = None
) -> np.ndarray:
    """
    Covariant derivative of a covariant tensor with respect to ``dΩ²``.

    Uses ``∇⁰_k T_ij... = (∂_k T̂)(∂_i x, ∂_j x, ...)`` where ``T̂`` is the ambient
    lift of ``T``.

    :param grid: The quadrature grid.
    :type grid: SphereGrid
    :param tensor: Components of shape ``(2,) * r + (N_θ, N_φ)`` with ``r ≥ 1``.
    :type tensor: np.ndarray
    :param bandlimit: Resolution of the spectral derivatives, defaults to ``L_max``.
    :type bandlimit: Optional[int]
    :return: Components of shape ``(2,) * (r + 1) + (N_θ, N_φ)``, derivative slot
        first.
    :rtype: np.ndarray
    """
    rank = tensor.ndim - 2
    lifted = np.einsum(_lift_spec(rank), tensor, *([grid.coframe] * rank))
    flat = lifted.reshape((3**rank,) + grid.shape)
    d_theta, d_phi = grid.partials(flat, bandlimit)
    derivative = np.stack([d_theta, d_phi]).reshape((2,) + (3,) * rank + grid.shape)
    frame = np.swapaxes(grid.frame, 0, 1)
    return np.einsum(_lower_spec(rank), derivative, *([frame] * rank))


def conformal_connection(omega: "ConformalFactor") -> np.ndarray:
    """
    Difference ``C^l_ki = Γ(γ)^l_ki - Γ(g₀)^l_ki`` of the Levi-Civita connections.

    :return: Array of shape ``(2, 2, 2, N_θ, N_φ)`` indexed ``[l, k, i]``.
    :rtype: np.ndarray
    """
    grid = omega.grid
    u = omega.log_gradient
    metric = np.stack([np.ones(grid.shape), grid.sin_theta_mesh**2])
    inverse = grid.inverse_round_metric
    correction = np.zeros((2, 2, 2) + grid.shape)
    for l in range(2):
        for k in range(2):
            for i in range(2):
                value = np.zeros(grid.shape)
                if l == k:
                    value = value + u[i]
                if l == i:
                    value = value + u[k]
                if k == i:
                    value = value - metric[k] * inverse[l] * u[l]
                correction[l, k, i] = value
    return correction


def covariant_derivative(omega: "ConformalFactor", tensor: np.ndarray) -> np.ndarray:
    """
    Covariant derivative of a covariant tensor with respect to ``γ``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param tensor: Components of shape ``(2,) * r + (N_θ, N_φ)``.
    :type tensor: np.ndarray
    :return: ``∇_k T_i...`` with the derivative slot first.
    :rtype: np.ndarray
    """
    rank = tensor.ndim - 2
    result = round_covariant_derivative(omega.grid, tensor)
    correction = conformal_connection(omega)
    slots = _SLOT_LETTERS[:rank]
    for position in range(rank):
        summed = slots[:position] + "l" + slots[position + 1 :]
        spec = f"lk{slots[position]}xy,{summed}xy->k{slots}xy"
        result = result - np.einsum(spec, correction, tensor)
    return result


def metric_tensor(omega: "ConformalFactor") -> SymTensorField:
    """The metric ``γ = ω² dΩ²``."""
    w2 = omega.values**2
    return SymTensorField(
        w2, np.zeros_like(w2), w2 * omega.grid.sin_theta_mesh**2, MetricTag.CONFORMAL
    )


def conformal_hessian(
    omega: "ConformalFactor",
    hessian0: SymTensorField,
    d_theta: Field,
    d_phi: Field,
) -> SymTensorField:
    """
    ``Hess_γ f`` from the round Hessian and first partials of ``f``.

    ``Hess_γ f = Hess₀ f - u_i f_j - u_j f_i + g₀_ij ⟨∇u, ∇f⟩₀``.
    """
    grid = omega.grid
    u_theta, u_phi = omega.log_gradient
    s2 = grid.sin_theta_mesh**2
    inner = u_theta * d_theta + u_phi * d_phi / s2
    return SymTensorField(
        tt=hessian0.tt - 2.0 * u_theta * d_theta + inner,
        tp=hessian0.tp - u_theta * d_phi - u_phi * d_theta,
        pp=hessian0.pp - 2.0 * u_phi * d_phi + inner * s2,
        metric=MetricTag.CONFORMAL,
    )


def conformal_scalar_ops(omega: "ConformalFactor", f: Field) -> ConformalScalarOps:
    """
    Laplacian, squared gradient and Hessian of ``f`` for the metric ``γ``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param f: Scalar field on the same grid.
    :type f: Field
    :rtype: ConformalScalarOps
    """
    grid = omega.grid
    f = grid.check_field(f)
    d = grid.derivatives(f)
    s, c = grid.sin_theta_mesh, grid.cos_theta_mesh
    hessian0 = SymTensorField(
        d.d_theta2,
        d.d_theta_phi - (c / s) * d.d_phi,
        d.d_phi2 + s * c * d.d_theta,
        MetricTag.ROUND,
    )
    w2 = omega.values**2
    return ConformalScalarOps(
        laplacian=grid.laplacian0(f) / w2,
        grad_norm2=(d.d_theta**2 + d.d_phi**2 / s**2) / w2,
        hessian=conformal_hessian(omega, hessian0, d.d_theta, d.d_phi),
    )


def covariant_grad_sym2(omega: "ConformalFactor", tensor: SymTensorField) -> Tensor3Field:
    """
    ``∇_i T_jk`` of a symmetric ``(0, 2)`` tensor for the metric ``γ``.

    Example::

        nabla_gamma = covariant_grad_sym2(omega, metric_tensor(omega))
        # vanishes up to spectral truncation
    """
    return Tensor3Field(covariant_derivative(omega, tensor.as_array()))


def rough_laplacian_sym2(omega: "ConformalFactor", tensor: SymTensorField) -> SymTensorField:
    """Rough Laplacian ``γ^kl ∇_k ∇_l T_ij`` by two covariant differentiations."""
    grid = omega.grid
    first = covariant_derivative(omega, tensor.as_array())
    second = covariant_derivative(omega, first)
    inverse = grid.inverse_round_metric / omega.values**2
    contracted = inverse[0] * second[0, 0] + inverse[1] * second[1, 1]
    return SymTensorField.from_array(contracted, MetricTag.CONFORMAL)


def _weighted_square_sum(components: np.ndarray, inverse: np.ndarray) -> Field:
    """Full contraction of a covariant tensor with a diagonal inverse metric."""
    rank = components.ndim - 2
    weights = np.ones((2,) * rank + inverse.shape[1:])
    for index in np.ndindex(*((2,) * rank)):
        for slot in index:
            weights[index] = weights[index] * inverse[slot]
    return np.sum((components**2 * weights).reshape((-1,) + inverse.shape[1:]), axis=0)


def gamma_norm2(
    omega: "ConformalFactor",
    field: Union[SymTensorField, Tensor3Field, VectorFieldSph],
) -> Field:
    """
    Pointwise squared ``γ``-norm of a tensor field.

    Covariant tensors are contracted with ``γ⁻¹ = ω⁻² g₀⁻¹`` in every slot;
    contravariant vectors with ``γ``.

    :param omega: The conformal factor.
    :type omega: ConformalFactor
    :param field: Symmetric 2-tensor, 3-tensor or vector field.
    :type field: Union[SymTensorField, Tensor3Field, VectorFieldSph]
    :rtype: Field
    """
    grid = omega.grid
    if isinstance(field, VectorFieldSph):
        if field.covariant:
            return field.norm2_round(grid) / omega.values**2
        return field.norm2_round(grid) * omega.values**2
    components = field.as_array() if isinstance(field, SymTensorField) else field.components
    inverse = grid.inverse_round_metric / omega.values**2
    return _weighted_square_sum(components, inverse)


def trace_gamma(omega: "ConformalFactor", tensor: SymTensorField) -> Field:
    """Trace ``γ^ij T_ij``."""
    inverse = omega.grid.inverse_round_metric / omega.values**2
    return inverse[0] * tensor.tt + inverse[1] * tensor.pp


def inner_gamma(omega: "ConformalFactor", left: SymTensorField, right: SymTensorField) -> Field:
    """Pointwise inner product ``γ^ik γ^jl S_ij T_kl``."""
    inverse = omega.grid.inverse_round_metric / omega.values**2
    return (
        inverse[0] ** 2 * left.tt * right.tt
        + 2.0 * inverse[0] * inverse[1] * left.tp * right.tp
        + inverse[1] ** 2 * left.pp * right.pp
    )


def trace_free(omega: "ConformalFactor", tensor: SymTensorField) -> SymTensorField:
    """Trace-free part ``T - ½ (tr_γ T) γ``."""
    return tensor - metric_tensor(omega) * (0.5 * trace_gamma(omega, tensor))

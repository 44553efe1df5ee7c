import unittest

import numpy as np

from lcflow.calculus import (
    conformal_scalar_ops,
    covariant_derivative,
    covariant_grad_sym2,
    gamma_norm2,
    inner_gamma,
    metric_tensor,
    rough_laplacian_sym2,
    round_covariant_derivative,
    trace_free,
    trace_gamma,
)
from lcflow.geometry import ConformalFactor
from lcflow.spectral import MetricTag, SphereGrid, SymTensorField, VectorFieldSph
from .examples import perturbed_factor


class RoundCovariantDerivativeTestCase(unittest.TestCase):
    def setUp(self):
        self.grid = SphereGrid(8)
        self.x, self.y, self.z = self.grid.cartesian

    def test_gradient_to_hessian(self):
        f = self.z**2 + self.x * self.y
        d_theta, d_phi = self.grid.partials(f)
        result = round_covariant_derivative(self.grid, np.stack([d_theta, d_phi]))
        hessian = self.grid.hessian0(f)
        self.assertEqual((2, 2) + self.grid.shape, result.shape)
        np.testing.assert_allclose(result[0, 0], hessian.tt, atol=1e-10)
        np.testing.assert_allclose(result[0, 1], hessian.tp, atol=1e-10)
        np.testing.assert_allclose(result[1, 0], hessian.tp, atol=1e-10)
        np.testing.assert_allclose(result[1, 1], hessian.pp, atol=1e-10)

    def test_round_metric_is_parallel(self):
        metric = SymTensorField(
            np.ones(self.grid.shape),
            np.zeros(self.grid.shape),
            self.grid.sin_theta_mesh**2,
            MetricTag.ROUND,
        )
        result = round_covariant_derivative(self.grid, metric.as_array())
        self.assertEqual((2, 2, 2) + self.grid.shape, result.shape)
        np.testing.assert_allclose(result, 0.0, atol=1e-10)


class ConformalCalculusTestCase(unittest.TestCase):
    def setUp(self):
        self.omega = perturbed_factor()
        self.grid = self.omega.grid

    def test_metric_tensor(self):
        gamma = metric_tensor(self.omega)
        self.assertIs(MetricTag.CONFORMAL, gamma.metric)
        np.testing.assert_allclose(gamma.tt, self.omega.values**2)
        np.testing.assert_allclose(gamma.tp, 0.0)

    def test_metric_is_parallel(self):
        gamma = metric_tensor(self.omega)
        result = covariant_grad_sym2(self.omega, gamma)
        scale = float(np.max(np.abs(gamma.as_array())))
        self.assertLess(float(np.max(np.abs(result.components))), 1e-9 * scale)

    def test_rough_laplacian_of_metric(self):
        result = rough_laplacian_sym2(self.omega, metric_tensor(self.omega))
        self.assertLess(float(np.max(np.abs(result.as_array()))), 1e-8)

    def test_covariant_derivative_of_differential(self):
        f = self.grid.ylm(2, 1) + 0.5 * self.grid.ylm(3, -2)
        d_theta, d_phi = self.grid.partials(f)
        result = covariant_derivative(self.omega, np.stack([d_theta, d_phi]))
        hessian = conformal_scalar_ops(self.omega, f).hessian
        np.testing.assert_allclose(result[0, 0], hessian.tt, atol=1e-9)
        np.testing.assert_allclose(result[0, 1], hessian.tp, atol=1e-9)
        np.testing.assert_allclose(result[1, 1], hessian.pp, atol=1e-9)

    def test_laplacian_is_trace_of_hessian(self):
        f = self.grid.ylm(2, 1) + self.grid.ylm(4, 0)
        ops = conformal_scalar_ops(self.omega, f)
        np.testing.assert_allclose(trace_gamma(self.omega, ops.hessian), ops.laplacian, atol=1e-9)

    def test_traces(self):
        gamma = metric_tensor(self.omega)
        np.testing.assert_allclose(trace_gamma(self.omega, gamma), 2.0)
        np.testing.assert_allclose(inner_gamma(self.omega, gamma, gamma), 2.0)
        np.testing.assert_allclose(gamma_norm2(self.omega, gamma), 2.0)
        np.testing.assert_allclose(
            trace_free(self.omega, gamma).as_array(), 0.0, atol=1e-14
        )

    def test_trace_free_is_trace_free(self):
        f = self.grid.ylm(3, 1)
        hessian = conformal_scalar_ops(self.omega, f).hessian
        np.testing.assert_allclose(
            trace_gamma(self.omega, trace_free(self.omega, hessian)), 0.0, atol=1e-11
        )

    def test_gamma_norm_of_vectors(self):
        ones = np.ones(self.grid.shape)
        w2 = self.omega.values**2
        vector = VectorFieldSph(ones, np.zeros(self.grid.shape), covariant=False)
        form = VectorFieldSph(ones, np.zeros(self.grid.shape), covariant=True)
        np.testing.assert_allclose(gamma_norm2(self.omega, vector), w2)
        np.testing.assert_allclose(gamma_norm2(self.omega, form), 1.0 / w2)


class RoundScalarOpsTestCase(unittest.TestCase):
    def test(self):
        grid = SphereGrid(8)
        c = 2.0
        omega = ConformalFactor.constant(grid, c)
        z = grid.cartesian[2]
        ops = conformal_scalar_ops(omega, z)
        np.testing.assert_allclose(ops.laplacian, -2.0 * z / c**2, atol=1e-12)
        np.testing.assert_allclose(ops.grad_norm2, (1.0 - z**2) / c**2, atol=1e-12)
        np.testing.assert_allclose(ops.hessian.tt, -z, atol=1e-11)
        np.testing.assert_allclose(ops.hessian.pp, -z * grid.sin_theta_mesh**2, atol=1e-11)

import math
import unittest

import numpy as np

from lcflow.errors import BandlimitError, GridError
from lcflow.spectral import (
    Direction,
    HarmonicCoeffs,
    MetricTag,
    SphereGrid,
    SymTensorField,
    Tensor3Field,
    VectorFieldSph,
    bandlimit_of,
    build_grid,
    normalized_legendre,
    sh_transform,
)


class NormalizedLegendreTestCase(unittest.TestCase):
    def setUp(self):
        self.x = np.linspace(-0.95, 0.95, 7)

    def test_low_degrees(self):
        (p,) = normalized_legendre(2, self.x)
        np.testing.assert_allclose(p[0, 0], 1.0 / math.sqrt(4.0 * math.pi))
        np.testing.assert_allclose(p[1, 0], math.sqrt(3.0 / (4.0 * math.pi)) * self.x)
        np.testing.assert_allclose(
            p[2, 0], math.sqrt(5.0 / (4.0 * math.pi)) * 0.5 * (3.0 * self.x**2 - 1.0)
        )
        self.assertTrue(np.all(p[1, 2] == 0.0))

    def test_orthonormal(self):
        nodes, weights = np.polynomial.legendre.leggauss(24)
        (p,) = normalized_legendre(10, nodes)
        for m in (0, 3):
            gram = np.einsum("ai,bi,i->ab", p[m:, m], p[m:, m], weights) * 2.0 * math.pi
            np.testing.assert_allclose(gram, np.eye(11 - m), atol=1e-12)

    def test_derivatives(self):
        theta = np.arccos(self.x)
        h = 1e-5
        p, dp, d2p = normalized_legendre(6, self.x, derivatives=2)
        (plus,) = normalized_legendre(6, np.cos(theta + h))
        (minus,) = normalized_legendre(6, np.cos(theta - h))
        np.testing.assert_allclose(dp, (plus - minus) / (2.0 * h), atol=1e-6)
        np.testing.assert_allclose(d2p, (plus - 2.0 * p + minus) / h**2, atol=1e-3)


class BandlimitTestCase(unittest.TestCase):
    def test_bandlimit_of(self):
        self.assertEqual(5, bandlimit_of(np.zeros((6, 11))))
        self.assertEqual(5, bandlimit_of(np.zeros((3, 6, 11))))

    def test_bandlimit_of_invalid(self):
        self.assertRaises(BandlimitError, bandlimit_of, np.zeros((6, 10)))
        self.assertRaises(BandlimitError, bandlimit_of, np.zeros(11))


class SphereGridTestCase(unittest.TestCase):
    def setUp(self):
        self.grid = SphereGrid(8)

    def test_sizes(self):
        self.assertEqual((18, 34), self.grid.shape)
        self.assertEqual(16, self.grid.L_max)
        self.assertEqual((18,), self.grid.cos_theta.shape)
        self.assertTrue(np.all(np.diff(self.grid.theta) > 0.0))

    def test_oversample_one(self):
        grid = SphereGrid(8, oversample=1.0)
        self.assertEqual((9, 17), grid.shape)
        self.assertEqual(8, grid.L_max)

    def test_invalid(self):
        self.assertRaises(GridError, SphereGrid, 3)
        self.assertRaises(GridError, SphereGrid, 4.5)
        self.assertRaises(GridError, SphereGrid, 8, 0.5)
        self.assertRaises(GridError, SphereGrid, 8, math.inf)
        self.assertRaises(GridError, build_grid, 2)

    def test_equality(self):
        self.assertEqual(SphereGrid(8), build_grid(8))
        self.assertNotEqual(SphereGrid(8), SphereGrid(9))
        self.assertEqual(1, len({SphereGrid(8), SphereGrid(8, 2.0)}))

    def test_repr(self):
        self.assertIn("L=8", repr(self.grid))

    def test_weights(self):
        self.assertAlmostEqual(2.0, float(self.grid.weights.sum()), places=13)

    def test_integrate(self):
        x, y, z = self.grid.cartesian
        self.assertAlmostEqual(4.0 * math.pi, self.grid.integrate(np.ones(self.grid.shape)), places=12)
        self.assertAlmostEqual(4.0 * math.pi / 3.0, self.grid.integrate(z**2), places=12)
        self.assertAlmostEqual(0.0, self.grid.integrate(x * y), places=12)
        self.assertAlmostEqual(4.0 * math.pi / 15.0, self.grid.integrate(x**2 * y**2), places=12)

    def test_integrate_batch(self):
        _, _, z = self.grid.cartesian
        result = self.grid.integrate(np.stack([np.ones(self.grid.shape), z**2]))
        np.testing.assert_allclose(result, [4.0 * math.pi, 4.0 * math.pi / 3.0])

    def test_mean(self):
        _, _, z = self.grid.cartesian
        self.assertAlmostEqual(1.0 / 3.0, self.grid.mean(z**2), places=12)
        self.assertAlmostEqual(0.6, self.grid.mean(z**2, weight=z**2), places=12)

    def test_check_field(self):
        self.assertRaises(GridError, self.grid.check_field, np.zeros((3, 4)))
        bad = np.zeros(self.grid.shape)
        bad[0, 0] = math.nan
        self.assertRaises(GridError, self.grid.check_field, bad)

    def test_cartesian(self):
        norms = np.sum(self.grid.cartesian**2, axis=0)
        np.testing.assert_allclose(norms, 1.0)

    def test_frame(self):
        e_theta, e_phi = self.grid.frame
        np.testing.assert_allclose(np.sum(e_theta * self.grid.cartesian, axis=0), 0.0, atol=1e-15)
        np.testing.assert_allclose(np.sum(e_theta * e_phi, axis=0), 0.0, atol=1e-15)
        np.testing.assert_allclose(np.sum(e_phi**2, axis=0), self.grid.sin_theta_mesh**2)


class HarmonicsTestCase(unittest.TestCase):
    def setUp(self):
        self.grid = SphereGrid(8)
        self.x, self.y, self.z = self.grid.cartesian

    def test_ylm_low_degrees(self):
        np.testing.assert_allclose(
            self.grid.ylm(0, 0), 1.0 / math.sqrt(4.0 * math.pi) * np.ones(self.grid.shape)
        )
        scale = math.sqrt(3.0 / (4.0 * math.pi))
        np.testing.assert_allclose(self.grid.ylm(1, 0), scale * self.z, atol=1e-14)
        np.testing.assert_allclose(self.grid.ylm(1, 1), scale * self.x, atol=1e-14)
        np.testing.assert_allclose(self.grid.ylm(1, -1), scale * self.y, atol=1e-14)

    def test_ylm_invalid(self):
        self.assertRaises(BandlimitError, self.grid.ylm, 2, 3)
        self.assertRaises(BandlimitError, self.grid.ylm, self.grid.L_max + 1, 0)

    def test_orthonormal(self):
        for l, m in ((2, 0), (3, -2), (5, 4), (8, -8)):
            coeffs = self.grid.analyze(self.grid.ylm(l, m))
            expected = np.zeros((9, 17))
            expected[l, m + 8] = 1.0
            np.testing.assert_allclose(coeffs, expected, atol=1e-13)
            self.assertAlmostEqual(1.0, self.grid.integrate(self.grid.ylm(l, m) ** 2), places=12)

    def test_analyze_truncates(self):
        f = self.grid.ylm(2, 1) + 0.5 * self.grid.ylm(7, -3)
        coeffs = self.grid.analyze(f, bandlimit=4)
        self.assertEqual((5, 9), coeffs.shape)
        self.assertAlmostEqual(1.0, coeffs[2, 1 + 4])
        np.testing.assert_allclose(self.grid.project(f, 4), self.grid.ylm(2, 1), atol=1e-13)

    def test_analyze_above_state_bandlimit(self):
        f = self.grid.ylm(12, 5)
        coeffs = self.grid.analyze(f, self.grid.L_max)
        self.assertAlmostEqual(1.0, coeffs[12, 5 + self.grid.L_max], places=12)
        self.assertRaises(BandlimitError, self.grid.analyze, f, self.grid.L_max + 1)

    def test_synthesize_roundtrip(self):
        rng = np.random.default_rng(5)
        coeffs = rng.standard_normal((9, 17))
        for l in range(9):
            coeffs[l, : 8 - l] = 0.0
            coeffs[l, 9 + l :] = 0.0
        np.testing.assert_allclose(
            self.grid.analyze(self.grid.synthesize(coeffs)), coeffs, atol=1e-12
        )

    def test_synthesize_batch(self):
        coeffs = np.zeros((2, 3, 5))
        coeffs[0, 0, 2] = 1.0
        coeffs[1, 1, 2] = 1.0
        fields = self.grid.synthesize(coeffs)
        self.assertEqual((2,) + self.grid.shape, fields.shape)
        np.testing.assert_allclose(fields[1], self.grid.ylm(1, 0), atol=1e-14)

    def test_synthesize_too_fine(self):
        coeffs = np.zeros((self.grid.L_max + 2, 2 * self.grid.L_max + 3))
        self.assertRaises(BandlimitError, self.grid.synthesize, coeffs)

    def test_evaluate(self):
        f = self.z**2 + self.x * self.y
        coeffs = self.grid.analyze(f)
        values = self.grid.evaluate(coeffs, self.grid.theta_mesh, self.grid.phi_mesh)
        np.testing.assert_allclose(values, f, atol=1e-13)

        theta, phi = np.array([0.0, 0.3, math.pi]), np.array([0.0, 1.1, 2.0])
        x, y, z = np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)
        np.testing.assert_allclose(
            self.grid.evaluate(coeffs, theta, phi), z**2 + x * y, atol=1e-13
        )

    def test_harmonic_coeffs(self):
        coeffs = HarmonicCoeffs(self.grid.analyze(3.0 * self.grid.ylm(4, -1)))
        self.assertEqual(8, coeffs.bandlimit)
        self.assertAlmostEqual(3.0, coeffs[(4, -1)])
        self.assertAlmostEqual(0.0, coeffs[(4, 1)])
        self.assertAlmostEqual(9.0, coeffs.norm2())
        self.assertRaises(BandlimitError, coeffs.__getitem__, (2, 3))
        self.assertRaises(BandlimitError, coeffs.__getitem__, (9, 0))

    def test_sh_transform(self):
        f = self.grid.ylm(3, 2)
        coeffs = sh_transform(self.grid, f, Direction.ANALYZE)
        self.assertIsInstance(coeffs, HarmonicCoeffs)
        np.testing.assert_allclose(
            sh_transform(self.grid, coeffs, Direction.SYNTHESIZE), f, atol=1e-13
        )
        self.assertRaises(BandlimitError, sh_transform, self.grid, coeffs, Direction.ANALYZE)
        fine = np.zeros((10, 19))
        self.assertRaises(BandlimitError, sh_transform, self.grid, fine, Direction.SYNTHESIZE)


class RoundOperatorsTestCase(unittest.TestCase):
    def setUp(self):
        self.grid = SphereGrid(8)
        self.x, self.y, self.z = self.grid.cartesian

    def test_laplacian(self):
        np.testing.assert_allclose(
            self.grid.laplacian0(self.z**2), 2.0 - 6.0 * self.z**2, atol=1e-12
        )
        for l, m in ((1, 1), (4, -3), (8, 0)):
            np.testing.assert_allclose(
                self.grid.laplacian0(self.grid.ylm(l, m)),
                -l * (l + 1) * self.grid.ylm(l, m),
                atol=1e-10,
            )

    def test_derivatives(self):
        d = self.grid.derivatives(self.z)
        np.testing.assert_allclose(d.d_theta, -self.grid.sin_theta_mesh, atol=1e-13)
        np.testing.assert_allclose(d.d_phi, 0.0, atol=1e-13)
        np.testing.assert_allclose(d.d_theta2, -self.z, atol=1e-12)

        d = self.grid.derivatives(self.x)
        np.testing.assert_allclose(d.d_phi, -self.y, atol=1e-13)
        np.testing.assert_allclose(d.d_phi2, -self.x, atol=1e-12)
        np.testing.assert_allclose(
            d.d_theta_phi, -self.grid.cos_theta_mesh * np.sin(self.grid.phi_mesh), atol=1e-12
        )

    def test_gradient(self):
        gradient = self.grid.gradient0(self.z)
        self.assertFalse(gradient.covariant)
        np.testing.assert_allclose(gradient.theta, -self.grid.sin_theta_mesh, atol=1e-13)
        np.testing.assert_allclose(
            gradient.norm2_round(self.grid), 1.0 - self.z**2, atol=1e-12
        )

    def test_hessian(self):
        for f in (self.x, self.y, self.z):
            hessian = self.grid.hessian0(f)
            self.assertIs(MetricTag.ROUND, hessian.metric)
            np.testing.assert_allclose(hessian.tt, -f, atol=1e-11)
            np.testing.assert_allclose(hessian.tp, 0.0, atol=1e-11)
            np.testing.assert_allclose(
                hessian.pp, -f * self.grid.sin_theta_mesh**2, atol=1e-11
            )

    def test_hessian_trace(self):
        f = self.z**3 + self.x * self.y
        hessian = self.grid.hessian0(f)
        trace = hessian.tt + hessian.pp / self.grid.sin_theta_mesh**2
        np.testing.assert_allclose(trace, self.grid.laplacian0(f), atol=1e-10)

    def test_spectral_norm(self):
        f = self.grid.ylm(2, 0) + 2.0 * self.grid.ylm(3, 1)
        self.assertAlmostEqual(1.0 + 4.0, self.grid.spectral_norm(f, 0), places=10)
        self.assertAlmostEqual(2**4 + 4.0 * 3**4, self.grid.spectral_norm(f, 2), places=8)
        self.assertAlmostEqual(0.0, self.grid.spectral_norm(np.ones(self.grid.shape), 3))


class TensorFieldTestCase(unittest.TestCase):
    def setUp(self):
        self.grid = SphereGrid(4)
        self.ones = np.ones(self.grid.shape)

    def test_vector_lower_raise(self):
        vector = VectorFieldSph(self.ones, self.ones, covariant=False)
        lowered = vector.lowered(self.grid)
        self.assertTrue(lowered.covariant)
        np.testing.assert_allclose(lowered.phi, self.grid.sin_theta_mesh**2)
        np.testing.assert_allclose(lowered.raised(self.grid).phi, self.ones)
        np.testing.assert_allclose(
            lowered.norm2_round(self.grid), vector.norm2_round(self.grid)
        )
        self.assertIs(lowered, lowered.lowered(self.grid))
        self.assertEqual((2,) + self.grid.shape, vector.as_array().shape)

    def test_sym_tensor_arithmetic(self):
        a = SymTensorField(self.ones, 2.0 * self.ones, 3.0 * self.ones)
        b = SymTensorField(self.ones, self.ones, self.ones)
        np.testing.assert_allclose((a + b).tp, 3.0)
        np.testing.assert_allclose((a - b).pp, 2.0)
        np.testing.assert_allclose((a * 2.0).tt, 2.0)
        np.testing.assert_allclose((2.0 * a).tp, 4.0)
        np.testing.assert_allclose((-a).pp, -3.0)

    def test_sym_tensor_array(self):
        a = SymTensorField(self.ones, 2.0 * self.ones, 3.0 * self.ones, MetricTag.ROUND)
        array = a.as_array()
        self.assertEqual((2, 2) + self.grid.shape, array.shape)
        np.testing.assert_allclose(array[0, 1], array[1, 0])
        array[1, 0] = 4.0
        b = SymTensorField.from_array(array, MetricTag.ROUND)
        np.testing.assert_allclose(b.tp, 3.0)
        self.assertIs(MetricTag.ROUND, b.metric)

    def test_tensor3(self):
        components = np.zeros((2, 2, 2) + self.grid.shape)
        components[0, 1, 0] = 1.0
        t = Tensor3Field(components)
        anti = t.antisymmetrized()
        np.testing.assert_allclose(anti.components[0, 1, 0], 1.0)
        np.testing.assert_allclose(anti.components[1, 0, 0], -1.0)
        np.testing.assert_allclose((t + t).components[0, 1, 0], 2.0)
        np.testing.assert_allclose((t - t).components, 0.0)

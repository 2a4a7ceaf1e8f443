import math

import numpy as np
from django.test import SimpleTestCase

from stats.exceptions import EstimatorError
from stats.rates import fit_rate


class FitRateTests(SimpleTestCase):
    """Tests for fit_rate.

    Methods:
        test_square_root_law: (eps, sqrt(eps)) gives slope 0.5 and r^2 = 1.
        test_linear_law: (eps, c eps) gives slope 1 and intercept ln c.
        test_noisy_slope: 1% multiplicative noise on six points keeps the
            slope in [0.45, 0.55] and matches the normal equations.
        test_predict: The fitted law reproduces the data of an exact law.
        test_invalid: Too few points, nonpositive values and repeated eps
            are refused.

    """

    def test_square_root_law(self):
        fit = fit_rate([(eps, math.sqrt(eps)) for eps in (0.1, 0.01, 0.001)])
        self.assertAlmostEqual(fit.slope, 0.5, delta=0.5e-12)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=12)
        self.assertEqual(fit.n_points, 3)
        np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-12)

    def test_linear_law(self):
        c = 3.7
        fit = fit_rate([(eps, c * eps) for eps in (0.5, 0.25, 0.125, 0.0625)])
        self.assertAlmostEqual(fit.slope, 1.0, delta=1e-12)
        self.assertAlmostEqual(fit.intercept, math.log(c), places=12)
        self.assertAlmostEqual(fit.slope_se, 0.0, places=12)

    def test_noisy_slope(self):
        rng = np.random.default_rng(20)
        epsilon = np.geomspace(2 ** -2, 2 ** -7, 6)
        err = 0.8 * np.sqrt(epsilon) * (1 + 0.01 * rng.standard_normal(6))
        fit = fit_rate(zip(epsilon, err))
        self.assertTrue(0.45 <= fit.slope <= 0.55)

        x, y = np.log(epsilon), np.log(err)
        design = np.column_stack((np.ones_like(x), x))
        intercept, slope = np.linalg.solve(design.T @ design, design.T @ y)
        self.assertAlmostEqual(fit.slope, slope, places=10)
        self.assertAlmostEqual(fit.intercept, intercept, places=10)
        residuals = y - design @ [intercept, slope]
        slope_se = math.sqrt(residuals @ residuals / 4
                             / np.sum((x - x.mean()) ** 2))
        self.assertAlmostEqual(fit.slope_se, slope_se, places=10)

    def test_predict(self):
        fit = fit_rate([(eps, 2 * eps ** 1.5) for eps in (0.3, 0.2, 0.1)])
        np.testing.assert_allclose(fit.predict([0.3, 0.05]),
                                   [2 * 0.3 ** 1.5, 2 * 0.05 ** 1.5],
                                   rtol=1e-12)

    def test_invalid(self):
        bad_inputs = [
            [(0.1, 1.0), (0.01, 0.5)],
            [(0.1, 1.0), (0.01, 0.0), (0.001, 0.1)],
            [(0.1, 1.0), (-0.01, 0.5), (0.001, 0.1)],
            [(0.1, 1.0), (0.1, 0.5), (0.001, 0.1)],
            [(0.1, 1.0), (0.01, np.inf), (0.001, 0.1)],
        ]
        for points in bad_inputs:
            with self.assertRaises(EstimatorError):
                fit_rate(points)

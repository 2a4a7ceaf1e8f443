import numpy as np
from django.test import SimpleTestCase, override_settings

from dynamics.assumptions import (AssumptionReport, ProbeBox,
                                  check_derivatives, validate_assumptions)
from dynamics.builtins import builtin_model
from dynamics.exceptions import (DerivativeMismatch, LogFloorViolation,
                                 ModelError)
from dynamics.tests.factories import custom_model, quadratic_drift_model


class ModelSpecTests(SimpleTestCase):
    """Tests for ModelSpec construction.

    Methods:
        test_negative_intensity: Negative lam is rejected.
        test_nonpositive_K: K must be > 0.
        test_nonfinite_initial_state: x0 and y0 must be finite.

    """

    def test_negative_intensity(self):
        with self.assertRaises(ModelError):
            custom_model(jump_intensity=-1.0)

    def test_nonpositive_K(self):
        with self.assertRaises(ModelError):
            custom_model(lipschitz_K=0.0)

    def test_nonfinite_initial_state(self):
        with self.assertRaises(ModelError):
            custom_model(y0=float('nan'))


class ValidateAssumptionsTests(SimpleTestCase):
    """Tests for validate_assumptions.

    Methods:
        test_pure_brownian_all_true: b = 0, sigma = 1, c = 0 with K = 1 passes
            everything with worst_ratio 0; growth stays in the ratios.
        test_deterministic_relax_worst_ratio_zero: All coefficients zero give
            worst_ratio 0.
        test_quadratic_drift_not_lipschitz: b = x^2 on [-10, 10] fails (H1).
        test_linear_jump_ou_exact_constants: The built-in K satisfies every
            probed inequality.
        test_linear_ratios_match_hand_computed: The Lipschitz ratio of the
            linear model equals a^2 / K up to rounding.
        test_small_K_fails: Shrinking K below a^2 breaks the Lipschitz check.
        test_deterministic_given_seed: Same seed, same report.
        test_log_floor_violation: 1 + dc_dx <= delta_log is refused.
        test_no_jumps_never_evaluates_c: With lam = 0, c is never called.
        test_invalid_probe_count: n_probes < 1 is rejected.
        test_derivative_mismatch_checked_first: Inconsistent derivatives fail
            before any probing.

    """

    def test_pure_brownian_all_true(self):
        report = validate_assumptions(builtin_model('pure_brownian'),
                                      ProbeBox(), 500, 3)
        self.assertIsInstance(report, AssumptionReport)
        self.assertTrue(report.h1_lipschitz_ok)
        self.assertTrue(report.h1_growth_ok)
        self.assertTrue(report.h2_deriv_bounded_ok)
        self.assertTrue(report.h2_jump_moments_ok)
        self.assertEqual(report.worst_ratio, 0.0)
        self.assertEqual(report.ratios['lipschitz_b_sigma'], 0.0)
        self.assertEqual(report.ratios['lipschitz_c'], 0.0)
        self.assertGreater(report.ratios['growth'], 0.5)
        self.assertLessEqual(report.ratios['growth'], 1.0)
        self.assertEqual(report.probe_count, 500)

    def test_deterministic_relax_worst_ratio_zero(self):
        report = validate_assumptions(builtin_model('deterministic_relax'),
                                      ProbeBox(), 200, 1)
        self.assertTrue(report.all_ok)
        self.assertEqual(report.worst_ratio, 0.0)

    def test_quadratic_drift_not_lipschitz(self):
        report = validate_assumptions(quadratic_drift_model(),
                                      ProbeBox(-10, 10), 200, 0)
        self.assertFalse(report.h1_lipschitz_ok)
        self.assertFalse(report.all_ok)
        self.assertGreater(report.worst_ratio, 1.0)

    def test_linear_jump_ou_exact_constants(self):
        model = builtin_model('linear_jump_ou', {
            'a': 1, 's': 0.5, 'gamma': 0.3, 'lam': 2})
        report = validate_assumptions(model, ProbeBox(-10, 10), 1000, 5)
        self.assertTrue(report.h1_lipschitz_ok)
        self.assertTrue(report.h1_growth_ok)
        self.assertTrue(report.h2_deriv_bounded_ok)
        self.assertTrue(report.h2_jump_moments_ok)
        self.assertLessEqual(report.worst_ratio, 1 + 1e-9)

    def test_linear_ratios_match_hand_computed(self):
        model = builtin_model('linear_jump_ou', {
            'a': 0.5, 's': 1, 'gamma': 0.2, 'lam': 1, 'K': 2})
        report = validate_assumptions(model, ProbeBox(), 300, 2)
        self.assertAlmostEqual(report.ratios['lipschitz_b_sigma'], 0.125,
                               places=9)
        self.assertAlmostEqual(report.ratios['db_dx'], 0.25, places=12)
        self.assertLessEqual(report.ratios['dc_dz_growth'], 0.1)
        self.assertGreater(report.ratios['dc_dz_growth'], 0.05)
        self.assertEqual(report.ratios['lipschitz_c'], 0.0)

    def test_small_K_fails(self):
        model = builtin_model('linear_jump_ou', {
            'a': 2, 's': 0.5, 'gamma': 0.3, 'lam': 2, 'K': 1})
        report = validate_assumptions(model, ProbeBox(), 100, 0)
        self.assertFalse(report.h1_lipschitz_ok)
        self.assertFalse(report.h2_deriv_bounded_ok)

    def test_deterministic_given_seed(self):
        model = builtin_model('pure_jump', {'lam': 2})
        first = validate_assumptions(model, ProbeBox(), 100, 11)
        second = validate_assumptions(model, ProbeBox(), 100, 11)
        self.assertEqual(first, second)

    def test_log_floor_violation(self):
        model = custom_model(
            c=lambda x, z: -np.asarray(x, dtype=float) * np.ones_like(z),
            dc_dx=lambda x, z: -np.ones(np.broadcast(
                np.asarray(x), np.asarray(z)).shape),
            jump_intensity=1.0,
        )
        with self.assertRaises(LogFloorViolation) as raised:
            validate_assumptions(model, ProbeBox(), 10, 0)
        self.assertEqual(raised.exception.index, 0)

    def test_no_jumps_never_evaluates_c(self):
        def exploding(x, z):
            raise AssertionError('c evaluated without jumps')

        model = custom_model(c=exploding, dc_dx=exploding, dc_dz=exploding)
        report = validate_assumptions(model, ProbeBox(), 50, 0)
        self.assertTrue(report.all_ok)

    def test_invalid_probe_count(self):
        with self.assertRaises(ModelError):
            validate_assumptions(builtin_model('pure_brownian'), ProbeBox(),
                                 0, 0)

    def test_derivative_mismatch_checked_first(self):
        model = custom_model(db_dx=lambda t, x: np.ones_like(
            np.asarray(x, dtype=float)))
        with self.assertRaises(DerivativeMismatch):
            validate_assumptions(model, ProbeBox(), 10, 0)


class CheckDerivativesTests(SimpleTestCase):
    """Tests for check_derivatives.

    Methods:
        test_builtins_consistent: Every built-in model passes at 100 probes.
        test_quadratic_consistent: Hand-written derivatives of x^2 pass.
        test_wrong_jump_derivative: A wrong dc_dz is reported by name.
        test_tolerance_from_settings: The tolerance is read from SKJUMP.

    """

    def test_builtins_consistent(self):
        models = [
            builtin_model('linear_jump_ou',
                          {'a': 1, 's': 0.5, 'gamma': 0.3, 'lam': 2}),
            builtin_model('deterministic_relax'),
            builtin_model('pure_brownian'),
            builtin_model('pure_jump', {'lam': 1}),
        ]
        for model in models:
            self.assertLessEqual(check_derivatives(model, rng_seed=4), 1e-5)

    def test_quadratic_consistent(self):
        self.assertLessEqual(
            check_derivatives(quadratic_drift_model(), ProbeBox(-10, 10)),
            1e-5)

    def test_wrong_jump_derivative(self):
        model = custom_model(
            c=lambda x, z: np.asarray(x, dtype=float) * z,
            dc_dx=lambda x, z: np.asarray(z, dtype=float) * np.ones_like(x),
            dc_dz=lambda x, z: 2 * np.asarray(x, dtype=float)
            * np.ones_like(z),
            jump_intensity=1.0,
        )
        with self.assertRaises(DerivativeMismatch) as raised:
            check_derivatives(model)
        self.assertEqual(raised.exception.field, 'dc_dz')

    @override_settings(SKJUMP={'FD_REL_TOL': 2.0})
    def test_tolerance_from_settings(self):
        model = custom_model(db_dx=lambda t, x: np.ones_like(
            np.asarray(x, dtype=float)))
        self.assertLessEqual(check_derivatives(model, ProbeBox(-0.5, 0.5)),
                             2.0)

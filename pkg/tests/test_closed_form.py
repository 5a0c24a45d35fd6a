"""
Unit tests for the quadratic and exponential-quadratic closed forms.
"""

import math
import unittest

import numpy as np

from pricing.closed_form import (ConstantLevel, ExponentialDecay, ExpQuadraticModel, PowerDecay, QuadraticModel,
                                 SpecialG1, bridge_martingale, expquad_bond_price, expquad_f_tilde,
                                 expquad_heat_kernel, expquad_heat_kernel_printed, expquad_market_price_of_risk,
                                 expquad_short_rate, quad_bond_price, quad_conditional_second_moment, quad_f,
                                 quad_market_price_of_risk, quad_short_rate, time_function_from_dict,
                                 weighted_heat_kernel)
from pricing.errors import DomainError, HorizonError, RangeError
from pricing.kernels import eval_weighted_heat_kernel
from pricing.process import AtomicPrior, InformationModel, bridge_conditional_law, information_premium
from pricing.quadrature import gaussian_expectation


def two_atom_process(horizon=10.0):
    return InformationModel(1.0, horizon, AtomicPrior([[0.0, 0.5], [1.0, 0.5]]))


class TestQuadraticModel(unittest.TestCase):
    """Test cases for the quadratic closed form."""

    def setUp(self):
        self.model = QuadraticModel(two_atom_process())

    def test_kernel_at_origin(self):
        self.assertAlmostEqual(quad_f(self.model, 0.0, 0.0), 1000.0 / 12.0, places=10)

    def test_bond_price_worked_value(self):
        self.assertAlmostEqual(quad_bond_price(self.model, 0.0, 5.0, 0.0), 0.3125, places=12)

    def test_bond_price_at_maturity_is_one(self):
        for x in (-2.0, 0.0, 1.5):
            with self.subTest(x=x):
                self.assertEqual(quad_bond_price(self.model, 3.0, 3.0, x), 1.0)

    def test_bond_prices_decrease_with_maturity(self):
        maturities = np.linspace(1.0, 9.5, 18)
        for x in (-1.0, 0.0, 2.0):
            with self.subTest(x=x):
                prices = np.array([quad_bond_price(self.model, 1.0, T, x) for T in maturities])
                self.assertTrue(np.all(prices > 0.0))
                self.assertTrue(np.all(prices <= 1.0))
                self.assertTrue(np.all(np.diff(prices) < 0.0))

    def test_bond_price_vectorized_over_state(self):
        xs = np.array([-1.0, 0.0, 1.0])
        prices = quad_bond_price(self.model, 1.0, 4.0, xs)
        for x, price in zip(xs, prices):
            self.assertAlmostEqual(price, quad_bond_price(self.model, 1.0, 4.0, float(x)), places=14)

    def test_maturity_before_valuation(self):
        with self.assertRaises(DomainError):
            quad_bond_price(self.model, 5.0, 2.0, 0.0)

    def test_horizon_guard(self):
        with self.assertRaises(HorizonError):
            quad_bond_price(self.model, 0.0, 10.0, 0.0)

    def test_short_rate_worked_value(self):
        self.assertAlmostEqual(quad_short_rate(self.model, 5.0, 1.0), 0.3, places=12)

    def test_short_rate_vanishes_at_zero_state(self):
        self.assertEqual(quad_short_rate(self.model, 2.0, 0.0), 0.0)

    def test_market_price_of_risk(self):
        t, x = 4.0, 0.8
        R = 6.0
        expected = information_premium(self.model.process, t, x) - 0.5 * R ** 2 * x / quad_f(self.model, t, x)
        self.assertAlmostEqual(quad_market_price_of_risk(self.model, t, x), expected, places=12)

    def test_second_moment_matches_quadrature(self):
        for u, t, x in ((0.5, 0.0, -1.5), (2.0, 2.0, 0.5), (4.0, 5.0, 2.0)):
            with self.subTest(u=u, t=t, x=x):
                mean, variance = bridge_conditional_law(self.model.process, t, t + u, x)
                expected = gaussian_expectation(lambda y: y ** 2, mean, variance)
                self.assertAlmostEqual(quad_conditional_second_moment(self.model, u, t, x), expected, places=10)

    def test_closed_form_matches_generic_kernel(self):
        generic = self.model.kernel().without_closed_form()
        for t in (0.0, 3.0, 7.5):
            with self.subTest(t=t):
                xs = np.array([-2.0, 0.0, 1.0])
                numeric = eval_weighted_heat_kernel(generic, t, xs)
                np.testing.assert_allclose(numeric, quad_f(self.model, t, xs), rtol=1e-8)

    def test_tagged_kernel_dispatch(self):
        kernel = self.model.kernel()
        self.assertEqual(weighted_heat_kernel(kernel, 2.0, 1.0), quad_f(self.model, 2.0, 1.0))
        with self.assertRaises(DomainError):
            weighted_heat_kernel(kernel.without_closed_form(), 2.0, 1.0)


class TestTimeFunctions(unittest.TestCase):
    """Test cases for g0/g1 time functions."""

    def test_derivatives(self):
        functions = [ExponentialDecay(0.3), PowerDecay(1.5, 10.0), ConstantLevel(2.0), SpecialG1(1.25, 10.0)]
        h = 1e-6
        for func in functions:
            with self.subTest(func=type(func).__name__):
                numeric = (func(3.0 + h) - func(3.0 - h)) / (2.0 * h)
                self.assertAlmostEqual(float(func.derivative(3.0)), float(numeric), places=6)

    def test_from_dict(self):
        self.assertIsNone(time_function_from_dict('special', 10.0))
        self.assertIsInstance(time_function_from_dict({'type': 'power', 'alpha': 2.0}, 10.0), PowerDecay)
        self.assertEqual(time_function_from_dict({'type': 'constant', 'value': 1.5}, 10.0).to_dict(),
                         {'type': 'constant', 'value': 1.5})
        with self.assertRaises(DomainError):
            time_function_from_dict({'type': 'linear'}, 10.0)

    def test_invalid_parameters(self):
        with self.assertRaises(DomainError):
            ExponentialDecay(-0.1)
        with self.assertRaises(DomainError):
            PowerDecay(0.0, 10.0)
        with self.assertRaises(DomainError):
            ConstantLevel(0.0)


class TestExpQuadraticModel(unittest.TestCase):
    """Test cases for the exponential-quadratic closed form."""

    def setUp(self):
        self.process = two_atom_process()
        self.special = ExpQuadraticModel(self.process, 1.0, ExponentialDecay(1.0), special_g1=True)
        self.general = ExpQuadraticModel(self.process, 1.5, ExponentialDecay(0.2), PowerDecay(0.5, 10.0))

    def test_parameter_checks(self):
        with self.assertRaises(DomainError):
            ExpQuadraticModel(self.process, 0.5, ExponentialDecay(1.0), special_g1=True)
        with self.assertRaises(DomainError):
            ExpQuadraticModel(self.process, 1.0, ExponentialDecay(1.0))

    def test_special_g1_kernel(self):
        t, x = 2.0, 0.7
        R = 8.0
        expected = math.exp(-t) + math.sqrt(R) * math.exp(x ** 2 / (2.0 * R))
        self.assertAlmostEqual(expquad_f_tilde(self.special, t, x), expected, places=12)

    def test_bond_prices(self):
        for model in (self.special, self.general):
            with self.subTest(model=model.special_g1):
                self.assertEqual(expquad_bond_price(model, 3.0, 3.0, 0.4), 1.0)
                prices = [expquad_bond_price(model, 1.0, T, 0.4) for T in (2.0, 4.0, 6.0, 8.0)]
                self.assertTrue(all(0.0 < p <= 1.0 for p in prices))
                self.assertTrue(all(later < earlier for earlier, later in zip(prices, prices[1:])))

    def test_special_short_rate(self):
        t, x = 2.0, 0.5
        R = 8.0
        expected = math.exp(-t) / (math.exp(-t) + math.sqrt(R) * math.exp(x ** 2 / (2.0 * R)))
        self.assertAlmostEqual(expquad_short_rate(self.special, t, x), expected, places=12)

    def test_short_rate_matches_bond_slope(self):
        """r = -d/dT log P(t, T) at T = t."""
        t, x, h = 2.0, 0.3, 1e-6
        slope = -(math.log(expquad_bond_price(self.general, t, t + h, x))) / h
        self.assertAlmostEqual(expquad_short_rate(self.general, t, x), slope, places=5)

    def test_market_price_of_risk(self):
        t, x = 3.0, 0.5
        R = 7.0
        growth = math.exp(x ** 2 / (2.0 * R))
        slope = math.sqrt(R) * growth * x / R
        expected = information_premium(self.process, t, x) - slope / expquad_f_tilde(self.special, t, x)
        self.assertAlmostEqual(expquad_market_price_of_risk(self.special, t, x), expected, places=12)

    def test_exponent_cap(self):
        with self.assertRaises(RangeError):
            expquad_f_tilde(self.special, 9.0, 100.0)

    def test_heat_kernel_constant(self):
        """Direct integration gives (U - t)^(eta + 1/2) e^(x^2/(2(U - t))) / eta."""
        generic = self.special.kernel().without_closed_form()
        for t, x in ((0.0, 0.0), (3.0, 1.0), (5.0, -0.5)):
            with self.subTest(t=t, x=x):
                numeric = eval_weighted_heat_kernel(generic, t, x)
                self.assertAlmostEqual(expquad_heat_kernel(1.0, 10.0, t, x) / numeric, 1.0, places=7)
                self.assertNotAlmostEqual(expquad_heat_kernel_printed(1.0, 10.0, t, x) / numeric, 1.0, places=3)

    def test_bridge_martingale(self):
        t, T, x = 1.0, 6.0, 0.8
        mean, variance = bridge_conditional_law(self.process, t, T, x)
        expected = gaussian_expectation(lambda y: np.full(np.shape(y), math.sqrt(10.0 - T)), mean, variance,
                                        tilt=1.0 / (10.0 - T))
        self.assertAlmostEqual(expected / bridge_martingale(10.0, t, x), 1.0, places=10)


if __name__ == '__main__':
    unittest.main()

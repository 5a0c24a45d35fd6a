"""
Unit tests for the information process, priors and path simulation.
"""

import math
import unittest

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from pricing.errors import DomainError, HorizonError
from pricing.process import (AtomicPrior, GaussianPrior, InformationModel, LrbDensitySpec, UniformPrior,
                             bridge_conditional_law, information_premium, lrb_transition_density,
                             measure_change_martingale, posterior_mean, prior_from_dict, simulate_paths)


def two_atom_model(sigma=1.0, horizon=10.0):
    return InformationModel(sigma, horizon, AtomicPrior([[0.0, 0.5], [1.0, 0.5]]))


class TestPriors(unittest.TestCase):
    """Test cases for prior laws."""

    def test_atom_weights_must_sum_to_one(self):
        with self.assertRaises(DomainError):
            AtomicPrior([[0.0, 0.5], [1.0, 0.4]])

    def test_negative_weight_rejected(self):
        with self.assertRaises(DomainError):
            AtomicPrior([[0.0, 1.5], [1.0, -0.5]])

    def test_from_dict(self):
        cases = [
            ({'type': 'atoms', 'atoms': [[0.0, 0.5], [1.0, 0.5]]}, AtomicPrior, 0.5),
            ({'type': 'gaussian', 'mean': 0.2, 'variance': 0.5}, GaussianPrior, 0.2),
            ({'type': 'uniform', 'lo': -1.0, 'hi': 3.0}, UniformPrior, 1.0),
        ]
        for data, cls, mean in cases:
            with self.subTest(type=data['type']):
                prior = prior_from_dict(data)
                self.assertIsInstance(prior, cls)
                self.assertAlmostEqual(prior.mean(), mean, places=12)
                self.assertEqual(prior_from_dict(prior.to_dict()).to_dict(), prior.to_dict())

    def test_unknown_prior_type(self):
        with self.assertRaises(DomainError):
            prior_from_dict({'type': 'cauchy'})

    def test_gaussian_posterior_mean(self):
        """Conjugate update: mean (m/s2 + alpha)/(1/s2 + beta)."""
        prior = GaussianPrior(0.3, 2.0)
        alpha, beta = 1.2, 0.8
        expected = (0.3 / 2.0 + alpha) / (1.0 / 2.0 + beta)
        self.assertAlmostEqual(float(prior.tilted_mean(alpha, beta)), expected, places=12)

    def test_uniform_tilted_mean_matches_direct_integration(self):
        prior = UniformPrior(0.0, 2.0)
        alpha, beta = 0.7, 0.4

        def weight(z):
            return math.exp(alpha * z - 0.5 * beta * z ** 2)

        expected = quad(lambda z: z * weight(z), 0.0, 2.0)[0] / quad(weight, 0.0, 2.0)[0]
        self.assertAlmostEqual(float(prior.tilted_mean(alpha, beta)), expected, places=8)

    def test_uniform_log_normalizer_matches_direct_integration(self):
        prior = UniformPrior(0.0, 2.0)
        alpha, beta = 0.7, 0.4
        expected = math.log(quad(lambda z: math.exp(alpha * z - 0.5 * beta * z ** 2), 0.0, 2.0)[0] / 2.0)
        self.assertAlmostEqual(float(prior.log_expectation_exp(alpha, beta)), expected, places=10)

    def test_gaussian_integrate_moments(self):
        """Hermite integration is exact for polynomials and handles array-valued integrands."""
        prior = GaussianPrior(0.3, 2.0)
        self.assertAlmostEqual(float(prior.integrate(lambda z: z ** 2)), 0.3 ** 2 + 2.0, places=12)
        shifts = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(prior.integrate(lambda z: (z - shifts) ** 2), (0.3 - shifts) ** 2 + 2.0,
                                   rtol=1e-12)

    def test_tilted_mean_stays_in_the_hull(self):
        """Extreme reweighting near the horizon still gives a mean inside [lo, hi]."""
        priors = {
            'uniform': UniformPrior(-1.0, 2.0),
            'atoms': AtomicPrior([[-1.0, 0.25], [0.5, 0.25], [2.0, 0.5]]),
        }
        k = 10.0 / 1e-6
        for name, prior in priors.items():
            for ell in (-1e4, -3.0, 0.0, 3.0, 1e4):
                with self.subTest(prior=name, ell=ell):
                    value = float(prior.tilted_mean(k * ell, k * 9.999999))
                    self.assertGreaterEqual(value, -1.0)
                    self.assertLessEqual(value, 2.0)


class TestInformationModel(unittest.TestCase):
    """Test cases for InformationModel and its conditional laws."""

    def setUp(self):
        self.model = two_atom_model()

    def test_invalid_parameters(self):
        prior = AtomicPrior.point_mass(0.0)
        for sigma, horizon in ((0.0, 10.0), (-1.0, 10.0), (1.0, 0.0), (1.0, float('inf'))):
            with self.subTest(sigma=sigma, horizon=horizon):
                with self.assertRaises(DomainError):
                    InformationModel(sigma, horizon, prior)

    def test_horizon_guard(self):
        self.model.guard(9.9)
        with self.assertRaises(HorizonError):
            self.model.guard(10.0)
        with self.assertRaises(DomainError):
            self.model.guard(-0.1)

    def test_bridge_law(self):
        mean, variance = bridge_conditional_law(self.model, 2.0, 6.0, 1.6)
        self.assertAlmostEqual(mean, 1.6 * 4.0 / 8.0, places=14)
        self.assertAlmostEqual(variance, 4.0 * 4.0 / 8.0, places=14)

    def test_bridge_law_variance_at_midpoint(self):
        _, variance = bridge_conditional_law(self.model, 0.0, 5.0, 0.0)
        self.assertAlmostEqual(math.sqrt(variance), math.sqrt(2.5), places=14)

    def test_bridge_law_requires_order(self):
        with self.assertRaises(DomainError):
            bridge_conditional_law(self.model, 5.0, 2.0, 0.0)

    def test_bridge_law_tower_property(self):
        """Composing (r -> s) and (s -> t) gives the law of (r -> t)."""
        r, s, t, x = 1.0, 4.0, 7.0, 0.9
        mid_mean, mid_variance = bridge_conditional_law(self.model, r, s, x)
        mean, variance = bridge_conditional_law(self.model, s, t, mid_mean)
        _, step_variance = bridge_conditional_law(self.model, s, t, 0.0)
        direct_mean, direct_variance = bridge_conditional_law(self.model, r, t, x)
        ratio = (10.0 - t) / (10.0 - s)
        self.assertAlmostEqual(mean, direct_mean, places=14)
        self.assertAlmostEqual(step_variance + ratio ** 2 * mid_variance, direct_variance, places=14)

    def test_posterior_mean_near_the_horizon(self):
        model = InformationModel(1.0, 10.0, UniformPrior(-1.0, 2.0))
        low = posterior_mean(model, 9.999999, -1e4)
        high = posterior_mean(model, 9.999999, 1e4)
        self.assertGreaterEqual(low, -1.0)
        self.assertLess(low, -1.0 + 1e-6)
        self.assertLessEqual(high, 2.0)
        self.assertGreater(high, 2.0 - 1e-6)

    def test_posterior_mean_in_the_hull_on_a_grid(self):
        models = {
            'atoms': self.model,
            'uniform': InformationModel(1.0, 10.0, UniformPrior(-1.0, 2.0)),
        }
        times = np.array([0.5, 5.0, 9.0, 9.999])
        for name, model in models.items():
            lo, hi = model.prior.hull()
            for ell in (-50.0, -2.0, 0.0, 4.0, 50.0):
                with self.subTest(prior=name, ell=ell):
                    values = posterior_mean(model, times, ell)
                    self.assertTrue(np.all(values >= lo))
                    self.assertTrue(np.all(values <= hi))

    def test_posterior_mean_two_atoms(self):
        """At t=5, L=2 the log-odds of X=1 are 2*2 - 10/2 = -1."""
        self.assertAlmostEqual(posterior_mean(self.model, 5.0, 2.0), 1.0 / (1.0 + math.e), places=12)
        self.assertAlmostEqual(posterior_mean(self.model, 5.0, 2.0), 0.26894, places=5)

    def test_posterior_at_time_zero_is_prior_mean(self):
        self.assertAlmostEqual(posterior_mean(self.model, 0.0, 0.0), 0.5, places=14)

    def test_information_premium(self):
        expected = 1.0 * 10.0 / 5.0 / (1.0 + math.e)
        self.assertAlmostEqual(information_premium(self.model, 5.0, 2.0), expected, places=12)

    def test_measure_change_martingale(self):
        """M = 1 / E[exp(alpha X - beta X^2/2)]."""
        phi = 0.5 + 0.5 * math.exp(2.0 * 2.0 - 0.5 * 10.0)
        self.assertAlmostEqual(measure_change_martingale(self.model, 5.0, 2.0), 1.0 / phi, places=12)
        self.assertEqual(measure_change_martingale(self.model, 0.0, 0.0), 1.0)

    def test_point_mass_at_zero_gives_unit_martingale(self):
        model = InformationModel(1.0, 10.0, AtomicPrior.point_mass(0.0))
        values = measure_change_martingale(model, 7.0, np.linspace(-3.0, 3.0, 7))
        np.testing.assert_allclose(values, 1.0, rtol=0, atol=0)


class TestSimulation(unittest.TestCase):
    """Test cases for simulate_paths."""

    def setUp(self):
        self.model = two_atom_model()

    def test_same_seed_same_paths(self):
        first = simulate_paths(self.model, [1.0, 2.0, 5.0], 50, measure='P', seed=11)
        second = simulate_paths(self.model, [1.0, 2.0, 5.0], 50, measure='P', seed=11)
        np.testing.assert_array_equal(first.values, second.values)
        np.testing.assert_array_equal(first.terminal_factors, second.terminal_factors)

    def test_chunking_and_workers_do_not_change_paths(self):
        reference = simulate_paths(self.model, [1.0, 4.0], 37, seed=3, workers=1, chunk_size=4096)
        chunked = simulate_paths(self.model, [1.0, 4.0], 37, seed=3, workers=4, chunk_size=5)
        np.testing.assert_array_equal(reference.values, chunked.values)

    def test_single_path_at_zero(self):
        ensemble = simulate_paths(self.model, [0.0], 1, seed=0)
        self.assertEqual(list(ensemble.rows()), [(0, 0.0, 0.0)])

    def test_bridge_variance(self):
        """Var_B[L_t] = t (U - t)/U within 3 standard errors."""
        n = 100000
        ensemble = simulate_paths(self.model, [2.5, 5.0, 8.0], n, measure='B', seed=20101112)
        for column, t in enumerate(ensemble.times):
            with self.subTest(t=t):
                sample = ensemble.values[:, column]
                expected = t * (10.0 - t) / 10.0
                standard_error = expected * math.sqrt(2.0 / (n - 1))
                self.assertLess(abs(np.var(sample, ddof=1) - expected), 3.0 * standard_error)
                self.assertLess(abs(np.mean(sample)), 3.0 * math.sqrt(expected / n))

    def test_p_and_b_share_the_bridge(self):
        b_paths = simulate_paths(self.model, [1.0, 3.0], 20, measure='B', seed=5)
        p_paths = simulate_paths(self.model, [1.0, 3.0], 20, measure='P', seed=5)
        signal = p_paths.terminal_factors[:, None] * np.array([1.0, 3.0])
        np.testing.assert_allclose(p_paths.values - signal, b_paths.values, rtol=0, atol=1e-12)

    def test_bridge_covariance_and_conditional_mean(self):
        """Under B, Cov(L_s, L_t) = s(U - t)/U and L_t - L_s (U - t)/(U - s) is uncorrelated with L_s."""
        n = 100000
        s, t = 2.5, 8.0
        ensemble = simulate_paths(self.model, [s, t], n, measure='B', seed=20101112)
        early, late = ensemble.at(s), ensemble.at(t)
        product = early * late
        self.assertLess(abs(product.mean() - s * (10.0 - t) / 10.0), 3.0 * product.std(ddof=1) / math.sqrt(n))
        residual = (late - early * (10.0 - t) / (10.0 - s)) * early
        self.assertLess(abs(residual.mean()), 3.0 * residual.std(ddof=1) / math.sqrt(n))

    def test_p_measure_mean_with_point_mass(self):
        """sigma = 1 and X = 1: E_P[L_5] = 5 and Var_P[L_5] = 2.5."""
        n = 100000
        model = InformationModel(1.0, 10.0, AtomicPrior.point_mass(1.0))
        sample = simulate_paths(model, [5.0], n, measure='P', seed=17).at(5.0)
        self.assertLess(abs(sample.mean() - 5.0), 3.0 * math.sqrt(2.5 / n))
        np.testing.assert_array_equal(simulate_paths(model, [5.0], 3, measure='P', seed=17).terminal_factors,
                                      np.ones(3))

    def test_at_reads_grid_column(self):
        ensemble = simulate_paths(self.model, [1.0, 3.0], 4, seed=1)
        np.testing.assert_array_equal(ensemble.at(3.0), ensemble.values[:, 1])
        with self.assertRaises(DomainError):
            ensemble.at(2.0)

    def test_invalid_requests(self):
        cases = [
            ({'grid': [2.0, 1.0], 'n_paths': 10}, DomainError),
            ({'grid': [], 'n_paths': 10}, DomainError),
            ({'grid': [1.0], 'n_paths': 0}, DomainError),
            ({'grid': [1.0, 10.0], 'n_paths': 10}, HorizonError),
        ]
        for kwargs, error in cases:
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(error):
                    simulate_paths(self.model, kwargs['grid'], kwargs['n_paths'])


class TestLrbTransitionDensity(unittest.TestCase):
    """Test cases for the Levy random bridge transition density with Brownian marginals."""

    def setUp(self):
        self.spec = LrbDensitySpec.brownian(10.0)

    def test_point_mass_gives_the_pinned_bridge(self):
        """With L_U = z the law from (s, x) to t is Normal(x + (t-s)(z-x)/(U-s), (t-s)(U-t)/(U-s))."""
        z, s, t, x = 1.5, 1.0, 4.0, 0.5
        ys = np.linspace(-3.0, 4.0, 15)
        mean = x + (t - s) * (z - x) / (10.0 - s)
        variance = (t - s) * (10.0 - t) / (10.0 - s)
        values = lrb_transition_density(self.spec, AtomicPrior.point_mass(z), s, t, x, ys)
        np.testing.assert_allclose(values, norm.pdf(ys, loc=mean, scale=math.sqrt(variance)), rtol=0, atol=1e-10)

    def test_density_integrates_to_one(self):
        priors = {
            'atoms': AtomicPrior([[-2.0, 0.3], [1.0, 0.7]]),
            'gaussian': GaussianPrior(0.5, 4.0),
            'uniform': UniformPrior(-3.0, 3.0),
        }
        s, t, x = 1.0, 4.0, 0.5
        for name, prior in priors.items():
            with self.subTest(prior=name):
                total = quad(lambda y: lrb_transition_density(self.spec, prior, s, t, x, y), -25.0, 25.0,
                             limit=200, points=[x])[0]
                self.assertAlmostEqual(total, 1.0, places=6)

    def test_gaussian_prior_matches_the_joint_gaussian_law(self):
        """With L_U ~ Normal(m, v), (L_s, L_t) is jointly Gaussian and L_t | L_s is Normal."""
        m, v, U = 0.5, 4.0, 10.0
        s, t, x = 1.0, 4.0, 0.5
        var_s = s * s * v / U ** 2 + s * (U - s) / U
        var_t = t * t * v / U ** 2 + t * (U - t) / U
        cov = s * t * v / U ** 2 + s * (U - t) / U
        mean = m * t / U + cov / var_s * (x - m * s / U)
        variance = var_t - cov ** 2 / var_s
        ys = np.linspace(-4.0, 5.0, 10)
        values = lrb_transition_density(self.spec, GaussianPrior(m, v), s, t, x, ys)
        np.testing.assert_allclose(values, norm.pdf(ys, loc=mean, scale=math.sqrt(variance)), rtol=1e-8)

    def test_domain(self):
        with self.assertRaises(DomainError):
            lrb_transition_density(self.spec, AtomicPrior.point_mass(0.0), 3.0, 2.0, 0.0, 0.0)
        with self.assertRaises(HorizonError):
            lrb_transition_density(self.spec, AtomicPrior.point_mass(0.0), 1.0, 10.0, 0.0, 0.0)


if __name__ == '__main__':
    unittest.main()

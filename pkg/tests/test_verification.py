"""
Unit tests for the verification harness.
"""

import unittest

import numpy as np

from config.manager import ConfigManager
from pricing.closed_form import ExponentialDecay, ExpQuadraticModel, QuadraticModel, quad_f
from pricing.errors import DomainError
from pricing.process import AtomicPrior, InformationModel, measure_change_martingale
from pricing.specs import AffineWeight, CustomWeight, KernelModel, QuadraticTerminal
from verification.checks import (check_bridge_martingale, check_errata, check_measure_change, check_pde_inequality,
                                 check_supermartingale, check_weight_admissibility)
from verification.report import CheckReport, suite_passed, summary_table
from verification.suite import SuiteContext, _pde_quadratic, run_suite, suite_names


def two_atom_process():
    return InformationModel(1.0, 10.0, AtomicPrior([[0.0, 0.5], [1.0, 0.5]]))


PAIRS = [(0.0, 2.0), (1.0, 5.0), (4.0, 8.0), (6.0, 9.0)]
STATES = np.linspace(-3.0, 3.0, 7)


class TestCheckReport(unittest.TestCase):
    """Test cases for CheckReport and suite summaries."""

    def test_passed_follows_tolerance(self):
        self.assertTrue(CheckReport('a', False, 1e-12, 1e-10).passed)
        self.assertFalse(CheckReport('b', True, 1e-8, 1e-10).passed)
        self.assertTrue(CheckReport('c', False, 1e-10, 1e-10).passed)

    def test_invalid_severity(self):
        with self.assertRaises(ValueError):
            CheckReport('a', True, 0.0, 1.0, severity='warning')

    def test_info_reports_never_block(self):
        reports = [CheckReport.build('ok', 0.0, 1e-10), CheckReport.build('known', 0.5, 1e-10, severity='info')]
        self.assertFalse(reports[1].passed)
        self.assertTrue(suite_passed(reports))
        reports.append(CheckReport.build('broken', 0.5, 1e-10))
        self.assertFalse(suite_passed(reports))

    def test_to_dict_is_plain(self):
        report = CheckReport.build('x', np.float64(0.25), 1.0, witness=(np.float64(1.0), 2), samples_used=np.int64(3),
                                   details={'grid': np.array([1.0, 2.0])})
        data = report.to_dict()
        self.assertEqual(data['witness'], [1.0, 2])
        self.assertIsInstance(data['witness'][0], float)
        self.assertEqual(data['details']['grid'], [1.0, 2.0])
        self.assertEqual(data['samples_used'], 3)

    def test_summary_table(self):
        reports = [CheckReport.build('first', 0.0, 1.0), CheckReport.build('second', 2.0, 1.0),
                   CheckReport.build('third', 2.0, 1.0, severity='info')]
        table = summary_table(reports)
        self.assertIn('PASS', table)
        self.assertIn('FAIL', table)
        self.assertIn('INFO', table)
        self.assertTrue(table.endswith('3 checks, 1 failed'))


class TestSupermartingaleChecks(unittest.TestCase):
    """Test cases for check_supermartingale."""

    def test_quadratic_model_passes(self):
        report = check_supermartingale(QuadraticModel(two_atom_process()), PAIRS, STATES)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(report.check_name, 'supermartingale.quadratic.quadrature')
        self.assertEqual(report.samples_used, len(PAIRS) * STATES.size)

    def test_expquad_model_passes(self):
        model = ExpQuadraticModel(two_atom_process(), 1.0, ExponentialDecay(1.0), special_g1=True)
        self.assertTrue(check_supermartingale(model, PAIRS, STATES).passed)

    def test_generic_expquad_kernel_passes(self):
        """The untagged kernel grows like exp(y^2/(2(U - t))) and still needs finite expectations."""
        model = KernelModel.exponential_quadratic(two_atom_process(), 1.0).without_closed_form()
        report = check_supermartingale(model, PAIRS, STATES)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(report.check_name, 'supermartingale.kernel.generic.quadrature')

    def test_monte_carlo_passes(self):
        report = check_supermartingale(QuadraticModel(two_atom_process()), PAIRS, STATES, method='mc',
                                       n_paths=20000, seed=7)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(report.details['seed'], 7)

    def test_invalid_weight_is_caught(self):
        model = KernelModel(two_atom_process(), QuadraticTerminal(), CustomWeight(lambda t, u: t, 'w=t'))
        report = check_supermartingale(model, [(1.0, 5.0), (2.0, 6.0), (4.0, 8.0)], (-1.0, 0.0, 1.0))
        self.assertFalse(report.passed)
        self.assertEqual(len(report.witness), 3)

    def test_bad_pairs_and_methods(self):
        model = QuadraticModel(two_atom_process())
        with self.assertRaises(DomainError):
            check_supermartingale(model, [(5.0, 2.0)], STATES)
        with self.assertRaises(DomainError):
            check_supermartingale(model, PAIRS, STATES, method='exact')
        p_model = KernelModel(two_atom_process(), QuadraticTerminal(), AffineWeight(10.0), measure='P')
        with self.assertRaises(DomainError):
            check_supermartingale(p_model, PAIRS, STATES, method='mc')


class TestAnalyticChecks(unittest.TestCase):
    """Test cases for the PDE, bridge martingale and weight checks."""

    def test_pde_inequality_quadratic(self):
        model = QuadraticModel(two_atom_process())
        grid = (np.linspace(0.0, 9.0, 4), np.array([0.0, 0.5, 2.0]))
        report = check_pde_inequality(lambda t, x: quad_f(model, t, x), grid, 10.0, steps=(1e-3, 1e-2),
                                      expected=lambda t, x: (10.0 - t) * x ** 2)
        self.assertTrue(report.passed, report.to_dict())
        self.assertTrue(report.details['strict'])
        self.assertIn((0.0, 0.0), report.details['zero_points'])

    def test_pde_inequality_detects_violation(self):
        """f = -(U - t)^3 has left side -3(U - t)^2 < 0."""
        grid = (np.array([1.0, 5.0]), np.array([-1.0, 1.0]))
        report = check_pde_inequality(lambda t, x: -(10.0 - t) ** 3 + 0.0 * np.asarray(x), grid, 10.0,
                                      steps=(1e-3, 1e-2))
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.details['min_lhs'], -243.0, places=4)

    def test_bridge_martingale(self):
        self.assertTrue(check_bridge_martingale(10.0, PAIRS, STATES).passed)

    def test_weight_admissibility_report(self):
        self.assertTrue(check_weight_admissibility(AffineWeight(10.0), 11, 10.0).passed)
        report = check_weight_admissibility(CustomWeight(lambda t, u: t, 'w=t'), 11, 10.0, 'weight.injected')
        self.assertFalse(report.passed)
        self.assertEqual(report.check_name, 'weight.injected')


class TestMeasureChange(unittest.TestCase):
    """Test cases for check_measure_change."""

    def test_closed_form_passes(self):
        report = check_measure_change(two_atom_process(), [1.0, 5.0, 9.0], 20000, 20101112)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(report.details['failed_subchecks'], [])

    def test_perturbed_martingale_fails(self):
        def perturbed(model, t, ell):
            return 1.1 * measure_change_martingale(model, t, ell)

        report = check_measure_change(two_atom_process(), [1.0, 5.0, 9.0], 20000, 20101112, martingale=perturbed)
        self.assertFalse(report.passed)
        self.assertIn('mean', report.details['failed_subchecks'])


class TestErrata(unittest.TestCase):
    """Test cases for corrected formulas against their printed variants."""

    @classmethod
    def setUpClass(cls):
        cls.reports = {report.check_name: report for report in check_errata()}

    def test_corrected_formulas_pass(self):
        for name in ('errata.second_moment', 'errata.bond_weight_argument', 'errata.two_root_option_integral',
                     'errata.expquad_kernel_constant'):
            with self.subTest(name=name):
                self.assertTrue(self.reports[name].passed, self.reports[name].to_dict())
                self.assertEqual(self.reports[name].severity, 'error')

    def test_printed_variants_are_informational(self):
        for name in ('errata.second_moment_printed', 'errata.bond_weight_argument_printed',
                     'errata.two_root_option_integral_printed', 'errata.expquad_kernel_constant_printed'):
            with self.subTest(name=name):
                self.assertFalse(self.reports[name].passed)
                self.assertEqual(self.reports[name].severity, 'info')

    def test_errata_do_not_fail_the_suite(self):
        self.assertTrue(suite_passed(self.reports.values()))


class TestSuites(unittest.TestCase):
    """Test cases for named suites."""

    def test_suite_names(self):
        self.assertEqual(suite_names(), ['default', 'errata', 'injected', 'quick'])

    def test_unknown_suite(self):
        with self.assertRaises(KeyError):
            run_suite('nightly')

    def test_errata_suite_order(self):
        reports = run_suite('errata', seed=1, workers=2)
        names = [report.check_name for report in reports]
        self.assertEqual(names, [report.check_name for report in check_errata()])
        self.assertTrue(suite_passed(reports))


class TestSuiteContext(unittest.TestCase):
    """Test cases for SuiteContext."""

    def test_steps_come_from_the_configuration(self):
        manager = ConfigManager(verbose=False)
        manager.config['verification'] = {'fd_step_fraction': 2e-4, 'pde_dx': 5e-3, 'seed': 9}
        context = SuiteContext.from_config(config_manager=manager)
        self.assertEqual(context.fd_step_fraction, 2e-4)
        self.assertEqual(context.pde_dx, 5e-3)
        self.assertEqual(context.seed, 9)

    def test_pde_check_reports_the_configured_steps(self):
        report = _pde_quadratic(SuiteContext.from_config(config_manager=ConfigManager(verbose=False)))
        self.assertTrue(report.passed, report.to_dict())
        self.assertAlmostEqual(report.details['steps'][0], 1e-4 * 10.0, places=15)
        self.assertEqual(report.details['steps'][1], 1e-2)


if __name__ == '__main__':
    unittest.main()

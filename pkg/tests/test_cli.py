"""
Tests for the command-line front end.
"""

import contextlib
import io
import json
import os
import tempfile
import unittest
from unittest.mock import patch

from app.cli import (EXIT_CONFIG_ERROR, EXIT_NUMERICAL_FAILURE, EXIT_OK, EXIT_VERIFICATION_FAILED, main,
                     raw_run_config, build_parser)
from db.database import open_archive
from lib.formatting import parse_csv


def run_cli(*argv):
    """Run main(argv) and return (exit code, stdout, stderr)."""
    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = main(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


class TestPricingCommands(unittest.TestCase):
    """Test cases for price-bond, yield-curve, price-option and simulate."""

    def test_price_bond_json(self):
        code, out, _ = run_cli('price-bond', '--model', 'quadratic', '--U', '10', '--t', '0', '--T', '5',
                               '--L', '0', '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        rows = json.loads(out)
        self.assertEqual(len(rows), 1)
        self.assertEqual(list(rows[0]), ['t', 'T', 'L', 'price'])
        self.assertAlmostEqual(rows[0]['price'], 0.3125, places=12)

    def test_price_bond_csv_grid(self):
        code, out, _ = run_cli('price-bond', '--T', '1:9:5', '--L=-1,0,1')
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith('t,T,L,price\n'))
        rows = parse_csv(out)
        self.assertEqual(len(rows), 15)
        self.assertEqual([row['T'] for row in rows[:3]], [1.0, 1.0, 1.0])
        self.assertEqual([row['L'] for row in rows[:3]], [-1.0, 0.0, 1.0])

    def test_yield_curve(self):
        code, out, _ = run_cli('yield-curve', '--T', '1,2,5', '--L', '0.5', '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        rows = json.loads(out)
        self.assertEqual([row['T'] for row in rows], [1.0, 2.0, 5.0])
        for row in rows:
            self.assertGreater(row['yield'], 0.0)

    def test_yield_curve_needs_increasing_maturities(self):
        code, _, err = run_cli('yield-curve', '--T', '5,3', '--L', '0')
        self.assertEqual(code, EXIT_CONFIG_ERROR)
        self.assertIn('T', json.loads(err[err.index('{\n'):])['details'])

    def test_yield_curve_single_level(self):
        code, _, _ = run_cli('yield-curve', '--T', '1,2', '--L', '0,1')
        self.assertEqual(code, EXIT_CONFIG_ERROR)

    def test_price_option_worked_example(self):
        code, out, _ = run_cli('price-option', '--s', '0', '--t', '2', '--T', '5', '--K', '0.2', '--L', '0',
                               '--format', 'json')
        self.assertEqual(code, EXIT_OK)
        row = json.loads(out)[0]
        self.assertAlmostEqual(row['price'], 0.148682, places=6)
        self.assertEqual(row['case_label'], 'cneg_disc_pos')

    def test_price_option_rejects_expquad(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'run.json')
            with open(path, 'w', encoding='utf-8') as f:
                json.dump({'model': {'family': 'expquad', 'eta': 1.0, 'g0': {'type': 'exponential', 'rate': 1.0},
                                     'g1': 'special'}}, f)
            code, _, _ = run_cli('price-option', '--config', path, '--s', '0', '--t', '2', '--T', '5', '--K', '0.2')
        self.assertEqual(code, EXIT_CONFIG_ERROR)

    def test_simulate_single_zero_row(self):
        code, out, _ = run_cli('simulate', '--grid', '0', '--paths', '1', '--seed', '0')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, 'path_id,time,value\n0,0,0\n')

    def test_simulate_is_reproducible(self):
        first = run_cli('simulate', '--grid', '1:4:4', '--paths', '5', '--seed', '9', '--measure', 'P')
        second = run_cli('simulate', '--grid', '1:4:4', '--paths', '5', '--seed', '9', '--measure', 'P')
        self.assertEqual(first[0], EXIT_OK)
        self.assertEqual(first[1], second[1])
        self.assertEqual(len(parse_csv(first[1])), 20)

    def test_out_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'bonds.csv')
            code, out, _ = run_cli('price-bond', '--T', '5', '--out', path)
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(out, '')
            with open(path, 'r', encoding='utf-8') as f:
                self.assertAlmostEqual(parse_csv(f.read())[0]['price'], 0.3125, places=12)


class TestConfigHandling(unittest.TestCase):
    """Test cases for config files, flags and exit codes."""

    def test_config_file_with_flag_override(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'run.json')
            with open(path, 'w', encoding='utf-8') as f:
                json.dump({'model': {'family': 'quadratic', 'U': 20.0}, 't': 0.0, 'T': [5.0]}, f)
            args = build_parser().parse_args(['price-bond', '--config', path, '--U', '10'])
            raw = raw_run_config(args)
        self.assertEqual(raw['model'], {'family': 'quadratic', 'U': 10.0})
        self.assertEqual(raw['T'], [5.0])
        self.assertEqual(raw['command'], 'price-bond')

    def test_malformed_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'broken.json')
            with open(path, 'w', encoding='utf-8') as f:
                f.write('{"model": ')
            code, out, err = run_cli('price-bond', '--config', path)
        self.assertEqual(code, EXIT_CONFIG_ERROR)
        self.assertEqual(out, '')
        self.assertIn('broken.json', err)

    def test_missing_config_file(self):
        code, _, _ = run_cli('price-bond', '--config', '/nonexistent/run.json')
        self.assertEqual(code, EXIT_CONFIG_ERROR)

    def test_invalid_values(self):
        cases = [
            ('price-bond', '--T', '5', '--sigma', '-1'),
            ('price-bond', '--T', '12'),
            ('price-bond', '--T', 'a,b'),
            ('price-bond', '--T', '5', '--prior', '{not json'),
            ('simulate', '--grid', '3,2,1'),
            ('price-option', '--s', '3', '--t', '2', '--T', '5', '--K', '0.2'),
        ]
        for argv in cases:
            with self.subTest(argv=argv):
                code, _, _ = run_cli(*argv)
                self.assertEqual(code, EXIT_CONFIG_ERROR)

    def test_unknown_flag(self):
        code, _, _ = run_cli('price-bond', '--maturity', '5')
        self.assertEqual(code, EXIT_CONFIG_ERROR)

    def test_numerical_failure(self):
        code, _, err = run_cli('price-bond', '--T', '9.99999999999')
        self.assertEqual(code, EXIT_NUMERICAL_FAILURE)
        self.assertIn('horizon', err)


class TestVerifyCommand(unittest.TestCase):
    """Test cases for the verify command."""

    def test_unknown_suite(self):
        code, out, _ = run_cli('verify', '--suite', 'nightly')
        self.assertEqual(code, EXIT_CONFIG_ERROR)
        self.assertEqual(out, '')

    def test_errata_suite_with_archive(self):
        with tempfile.TemporaryDirectory() as tmp:
            archive = os.path.join(tmp, 'reports.db')
            code, out, err = run_cli('verify', '--suite', 'errata', '--seed', '3', '--archive', archive)
            self.assertEqual(code, EXIT_OK)
            reports = json.loads(out)
            self.assertTrue(all(report['check_name'].startswith('errata.') for report in reports))
            self.assertIn('checks, 0 failed', err)

            repository = open_archive(archive)
            runs = repository.list_runs()
            self.assertEqual(len(runs), 1)
            self.assertEqual(runs[0]['suite'], 'errata')
            self.assertEqual(runs[0]['seed'], 3)
            stored = repository.get_run(runs[0]['id'])
            self.assertEqual(len(stored['checks']), len(reports))
            repository.db_manager.close()

    def test_archive_is_closed_after_the_run(self):
        opened = []

        def recording_open(path):
            repository = open_archive(path)
            opened.append(repository)
            return repository

        with tempfile.TemporaryDirectory() as tmp, patch('app.cli.open_archive', side_effect=recording_open):
            code, _, _ = run_cli('verify', '--suite', 'errata', '--archive', os.path.join(tmp, 'reports.db'))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(opened), 1)
        self.assertFalse(opened[0].db_manager.is_initialized())

    def test_failing_suite_exit_code(self):
        code, out, _ = run_cli('verify', '--suite', 'injected', '--paths', '20000')
        self.assertEqual(code, EXIT_VERIFICATION_FAILED)
        self.assertTrue(any(not report['passed'] for report in json.loads(out)))


if __name__ == '__main__':
    unittest.main()

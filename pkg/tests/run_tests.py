#!/usr/bin/env python3
"""
Test runner for the heat-kernel pricing toolkit.

Runs every test module, or a named group, and prints a short summary.
"""

import argparse
import os
import sys
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))

# Modules grouped by what they exercise; 'numerics' holds the slow ones.
GROUPS = {
    'numerics': ['quadrature', 'process', 'closed_form', 'kernels', 'options', 'verification'],
    'surface': ['cli', 'server', 'schemas', 'validators', 'config'],
    'archive': ['database'],
}


def load_modules(names):
    """Load test modules by short name ('kernels' -> tests.test_kernels)."""
    loader = unittest.TestLoader()
    return unittest.TestSuite(loader.loadTestsFromName(f'tests.test_{name}') for name in names)


def run_suite(suite, verbosity=2):
    runner = unittest.TextTestRunner(verbosity=verbosity, buffer=True)
    return runner.run(suite)


def print_test_summary(result):
    """Print counts and the first line of each failure."""
    failures = len(result.failures)
    errors = len(result.errors)
    skipped = len(result.skipped)

    print("\n" + "=" * 60)
    print(f"Tests run: {result.testsRun}  failures: {failures}  errors: {errors}  skipped: {skipped}")

    for label, entries in (('FAILED', result.failures), ('ERROR', result.errors)):
        for test, traceback in entries:
            lines = [line for line in traceback.strip().splitlines() if line.strip()]
            print(f"{label} {test}: {lines[-1] if lines else ''}")

    print("OK" if result.wasSuccessful() else "SOME TESTS FAILED")
    print("=" * 60)


def main(argv=None):
    parser = argparse.ArgumentParser(description='Run the pricing toolkit tests')
    target = parser.add_mutually_exclusive_group()
    target.add_argument('--module', '-m', help='Run one module, e.g. kernels or cli')
    target.add_argument('--group', '-g', choices=sorted(GROUPS), help='Run a group of modules')
    parser.add_argument('--quiet', '-q', action='store_true', help='One character per test')
    args = parser.parse_args(argv)

    if args.module:
        suite = load_modules([args.module])
    elif args.group:
        suite = load_modules(GROUPS[args.group])
    else:
        suite = unittest.TestLoader().discover(TESTS_DIR, pattern='test_*.py',
                                               top_level_dir=os.path.dirname(TESTS_DIR))

    result = run_suite(suite, verbosity=1 if args.quiet else 2)
    print_test_summary(result)
    return 0 if result.wasSuccessful() else 1


if __name__ == '__main__':
    sys.exit(main())

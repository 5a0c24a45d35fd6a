"""
Integration tests for the pricing service endpoints.
"""

import os
import tempfile
import unittest

from app.server import PricingServer


class TestPricingServer(unittest.TestCase):
    """Test cases for PricingServer routes."""

    def setUp(self):
        """Set up a server with its archive in a temporary directory."""
        self.temp_dir = tempfile.TemporaryDirectory()
        self.server = PricingServer(archive_path=os.path.join(self.temp_dir.name, 'reports.db'))
        self.app = self.server.get_app()
        self.app.config['TESTING'] = True
        self.client = self.app.test_client()

    def tearDown(self):
        """Clean up test fixtures."""
        self.server.db_manager.close()
        self.temp_dir.cleanup()

    def test_home(self):
        response = self.client.get('/')
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertIn('endpoints', data)
        self.assertIn('timestamp', data)

    def test_health(self):
        response = self.client.get('/health')
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertEqual(data['status'], 'healthy')
        self.assertEqual(data['archive']['run_count'], 0)

    def test_health_degrades_without_archive(self):
        server = PricingServer(archive_path='/nonexistent/dir/reports.db')
        response = server.get_app().test_client().get('/health')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.get_json()['status'], 'degraded')

    def test_price_bond(self):
        response = self.client.post('/bond', json={'model': {'family': 'quadratic'}, 't': 0, 'T': 5, 'L': 0})
        self.assertEqual(response.status_code, 200)
        data = response.get_json()
        self.assertEqual(data['columns'], ['t', 'T', 'L', 'price'])
        self.assertEqual(len(data['rows']), 1)
        self.assertAlmostEqual(data['rows'][0]['price'], 0.3125, places=12)

    def test_yield_curve(self):
        response = self.client.post('/yield-curve', json={'T': [1, 2, 5], 'L': 0.5})
        self.assertEqual(response.status_code, 200)
        rows = response.get_json()['rows']
        self.assertEqual([row['T'] for row in rows], [1, 2, 5])
        for row in rows:
            self.assertGreater(row['yield'], 0.0)

    def test_price_option(self):
        response = self.client.post('/option', json={'options': [{'s': 0, 't': 2, 'T': 5, 'K': 0.2, 'L': 0}]})
        self.assertEqual(response.status_code, 200)
        row = response.get_json()['rows'][0]
        self.assertAlmostEqual(row['price'], 0.148682, places=6)
        self.assertEqual(row['case_label'], 'cneg_disc_pos')

    def test_generic_model_bond(self):
        body = {'model': {'family': 'generic', 'F': {'type': 'quadratic'}, 'w': {'type': 'affine'}},
                'T': 5, 'L': 0}
        response = self.client.post('/bond', json=body)
        self.assertEqual(response.status_code, 200)
        self.assertAlmostEqual(response.get_json()['rows'][0]['price'], 0.3125, places=8)

    def test_bad_requests(self):
        cases = [
            ('/bond', {'data': 'T=5', 'content_type': 'text/plain'}),
            ('/bond', {'data': '{"T": ', 'content_type': 'application/json'}),
            ('/bond', {'json': [5]}),
            ('/bond', {'json': {'T': 12}}),
            ('/bond', {'json': {'T': 5, 'model': {'sigma': -1}}}),
            ('/yield-curve', {'json': {'T': [2, 1]}}),
            ('/option', {'json': {'s': 0, 't': 2, 'T': 5, 'K': 0.2,
                                  'model': {'family': 'expquad', 'eta': 1.0, 'g1': 'special',
                                            'g0': {'type': 'exponential', 'rate': 1.0}}}}),
        ]
        for path, kwargs in cases:
            with self.subTest(path=path, body=kwargs):
                response = self.client.post(path, **kwargs)
                self.assertEqual(response.status_code, 400)
                self.assertIn('error', response.get_json())

    def test_validation_details(self):
        response = self.client.post('/bond', json={'T': 5, 'model': {'sigma': 0}})
        self.assertEqual(response.status_code, 400)
        self.assertIn('sigma', response.get_json()['details']['model'])

    def test_numerical_failure(self):
        response = self.client.post('/bond', json={'T': 9.99999999999})
        self.assertEqual(response.status_code, 422)
        data = response.get_json()
        self.assertEqual(data['error'], 'Numerical failure')
        self.assertIn('horizon', data['message'])

    def test_not_found(self):
        response = self.client.get('/bonds')
        self.assertEqual(response.status_code, 404)
        self.assertEqual(response.get_json()['error'], 'Not Found')

    def test_method_not_allowed(self):
        response = self.client.get('/bond')
        self.assertEqual(response.status_code, 405)
        self.assertEqual(response.get_json()['error'], 'Method Not Allowed')


if __name__ == '__main__':
    unittest.main()

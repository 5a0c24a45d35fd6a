#!/usr/bin/env python3
"""
Smoke test for a running pricing service.

Posts the worked examples to each endpoint with requests and compares the
answers. Start the service first (python main.py serve), then run:

    python scripts/smoke_service.py --url http://localhost:5000
"""

import argparse
import json
import math
import sys

import requests

WORKED_EXAMPLES = [
    ('/bond', {'model': {'family': 'quadratic'}, 't': 0, 'T': 5, 'L': 0}, 'price', 0.3125),
    ('/option', {'s': 0, 't': 2, 'T': 5, 'K': 0.2, 'L': 0}, 'price', 0.148682),
]


def check_get(base_url, path):
    print(f"=== GET {path} ===")
    response = requests.get(f"{base_url}{path}", timeout=10)
    print(f"Status: {response.status_code}")
    print(json.dumps(response.json(), indent=2))
    print()
    return response.status_code == 200


def check_worked_example(base_url, path, body, column, expected):
    print(f"=== POST {path} ===")
    response = requests.post(f"{base_url}{path}", json=body, timeout=60)
    print(f"Status: {response.status_code}")
    if response.status_code != 200:
        print(json.dumps(response.json(), indent=2))
        return False
    value = response.json()['rows'][0][column]
    ok = math.isclose(value, expected, abs_tol=1e-6)
    print(f"{column} = {value!r} (expected {expected}) {'OK' if ok else 'MISMATCH'}")
    print()
    return ok


def check_rejects(base_url, path, body, status):
    print(f"=== POST {path} (expect {status}) ===")
    response = requests.post(f"{base_url}{path}", json=body, timeout=10)
    print(f"Status: {response.status_code}")
    print(json.dumps(response.json(), indent=2))
    print()
    return response.status_code == status


def main(argv=None):
    parser = argparse.ArgumentParser(description='Smoke test a running pricing service')
    parser.add_argument('--url', default='http://localhost:5000', help='Service base URL')
    args = parser.parse_args(argv)
    base_url = args.url.rstrip('/')

    try:
        results = [check_get(base_url, '/'), check_get(base_url, '/health')]
        results += [check_worked_example(base_url, *example) for example in WORKED_EXAMPLES]
        results.append(check_rejects(base_url, '/bond', {'T': 12}, 400))
        results.append(check_rejects(base_url, '/bond', {'T': 9.99999999999}, 422))
    except requests.exceptions.ConnectionError:
        print(f"Could not connect to {base_url}; is the service running?")
        return 2

    failed = results.count(False)
    print(f"{len(results)} checks, {failed} failed")
    return 0 if failed == 0 else 1


if __name__ == '__main__':
    sys.exit(main())

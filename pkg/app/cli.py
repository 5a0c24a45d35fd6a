"""
Command-line front end.

    python main.py price-bond --model quadratic --U 10 --t 0 --T 5 --L 0
    python main.py yield-curve --T 1:9:9 --L 1 --format json
    python main.py price-option --s 0 --t 2 --T 5 --K 0.1,0.2,0.3
    python main.py simulate --grid 0:9:10 --paths 1000 --seed 7 --out paths.csv
    python main.py verify --suite default --archive reports.db
    python main.py serve --port 5000

A JSON config file (--config) holds a RunConfig; flags override its
values. Tables go to --out or stdout; diagnostics go to stderr.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from marshmallow import ValidationError

from app.pricing import (BOND_COLUMNS, CURVE_COLUMNS, OPTION_COLUMNS, PATH_COLUMNS, bond_rows, option_rows,
                         quadrature_settings, simulation_rows, yield_curve_rows)
from config.manager import configure_logging, get_config
from db.database import DatabaseError, open_archive
from lib.formatting import render_rows
from lib.messages import ErrorMessages, LogMessages
from lib.schemas import COMMANDS, dump_reports, format_validation_error, run_config_schema
from lib.validators import TimeValidator, ValidationError as ConfigError
from pricing.errors import PricingError
from verification.report import suite_passed, summary_table
from verification.suite import run_suite, suite_names

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3

# flag dest -> ModelSchema field
MODEL_FLAGS = (('model', 'family'), ('sigma', 'sigma'), ('U', 'U'), ('eta', 'eta'))
RUN_FLAGS = ('s', 't', 'grid', 'paths', 'seed', 'measure', 'format', 'out', 'suite', 'archive', 'workers')


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    parent.add_argument('--config', metavar='PATH', help='JSON run configuration')
    parent.add_argument('--log-level', dest='log_level', help='Override the configured log level')

    model = parent.add_argument_group('model')
    model.add_argument('--model', choices=('quadratic', 'expquad', 'generic'), help='Model family')
    model.add_argument('--sigma', type=float, help='Information flow rate')
    model.add_argument('--U', dest='U', type=float, help='Information horizon')
    model.add_argument('--eta', type=float, help='Exponent of the exponential-quadratic family (> 1/2)')
    model.add_argument('--prior', metavar='JSON', help='Prior law of X as JSON')

    run = parent.add_argument_group('run')
    run.add_argument('--t', dest='t', type=float, help='Valuation time (option maturity for price-option)')
    run.add_argument('--T', dest='T', metavar='LIST', help="Bond maturities: '5', '1,2,5' or '1:9:9'")
    run.add_argument('--s', dest='s', type=float, help='Option valuation time')
    run.add_argument('--K', dest='K', metavar='LIST', help='Strikes')
    run.add_argument('--L', dest='L', metavar='LIST', help='Information levels')
    run.add_argument('--grid', metavar='SPEC', help="Simulation grid: '0:9:10' or '0,1,2'")
    run.add_argument('--paths', type=int, help='Number of simulated paths')
    run.add_argument('--seed', type=int, help='Random seed')
    run.add_argument('--measure', choices=('P', 'B'), help='Simulation measure')
    run.add_argument('--workers', type=int, help='Worker threads')

    output = parent.add_argument_group('output')
    output.add_argument('--format', choices=('csv', 'json'), help='Table format')
    output.add_argument('--out', metavar='PATH', help='Write the table here instead of stdout')
    output.add_argument('--suite', help=f"Verification suite ({', '.join(suite_names())})")
    output.add_argument('--archive', metavar='PATH', help='SQLite file to store the verification run in')
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='heat-kernel-pricing', description='Weighted heat kernel pricing toolkit',
                                     allow_abbrev=False)
    subparsers = parser.add_subparsers(dest='command', required=True)
    common = _common_options()
    helps = {
        'price-bond': 'Discount bond prices (t, T, L, price)',
        'yield-curve': 'Bond prices and yields over a maturity grid',
        'price-option': 'Bond call prices with case labels',
        'simulate': 'Information process paths (path_id, time, value)',
        'verify': 'Run a verification suite and emit JSON reports',
    }
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=helps[command], allow_abbrev=False)

    serve = subparsers.add_parser('serve', help='Run the pricing service', allow_abbrev=False)
    serve.add_argument('--host', help='Bind address')
    serve.add_argument('--port', type=int, help='Port')
    serve.add_argument('--debug', action='store_true', help='Flask debug mode')
    serve.add_argument('--log-level', dest='log_level', help='Override the configured log level')
    return parser


def _read_config_file(path: str) -> dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(ErrorMessages.CONFIG_READ_ERROR.format(path=path, error=e))
    if not isinstance(data, dict):
        raise ConfigError(ErrorMessages.CONFIG_READ_ERROR.format(path=path, error='expected a JSON object'))
    return data


def _parse_list(name: str, text: str):
    is_valid, error_msg, points = TimeValidator.parse_grid_spec(text)
    if not is_valid:
        raise ConfigError(error_msg, {name: [error_msg]})
    return points


def raw_run_config(args: argparse.Namespace) -> dict:
    """Merge the config file with the flags; flags win."""
    raw = _read_config_file(args.config) if args.config else {}
    raw['command'] = args.command

    model = dict(raw.get('model') or {})
    for dest, key in MODEL_FLAGS:
        value = getattr(args, dest)
        if value is not None:
            model[key] = value
    if args.prior:
        try:
            model['prior'] = json.loads(args.prior)
        except json.JSONDecodeError as e:
            raise ConfigError(ErrorMessages.JSON_PARSE_ERROR.format(error=e), {'prior': [str(e)]})
    raw['model'] = model

    for name in RUN_FLAGS:
        value = getattr(args, name)
        if value is not None:
            raw[name] = value
    for name in ('T', 'K', 'L'):
        text = getattr(args, name)
        if text is not None:
            raw[name] = _parse_list(name, text)
    return raw


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _table(config: dict, columns, rows) -> int:
    digits = int(get_config().get_output_config()['significant_digits'])
    _emit(render_rows(columns, rows, config['format'], digits), config['out'])
    return EXIT_OK


def cmd_price_bond(config: dict) -> int:
    settings = quadrature_settings(config['quadrature'])
    rows = bond_rows(config['model'], config['t'], config['T'], config['L'], settings)
    return _table(config, BOND_COLUMNS, rows)


def cmd_yield_curve(config: dict) -> int:
    settings = quadrature_settings(config['quadrature'])
    rows = yield_curve_rows(config['model'], config['t'], config['T'], config['L'][0], settings)
    return _table(config, CURVE_COLUMNS, rows)


def cmd_price_option(config: dict) -> int:
    settings = quadrature_settings(config['quadrature'])
    rows = option_rows(config['model'], config['options'], settings)
    return _table(config, OPTION_COLUMNS, rows)


def cmd_simulate(config: dict) -> int:
    paths = config['paths'] or int(get_config().get_simulation_config().get('default_paths', 100000))
    seed = config['seed'] if config['seed'] is not None else 0
    rows = simulation_rows(config['model'], config['grid'], paths, config['measure'], seed, config['workers'])
    return _table(config, PATH_COLUMNS, rows)


def cmd_verify(config: dict) -> int:
    """
    Run the selected suite, print the JSON report array and the summary table.

    Raises:
        ConfigError: unknown suite name or an archive that cannot be written
    """
    name = config['suite']
    if name not in suite_names():
        raise ConfigError(ErrorMessages.UNKNOWN_SUITE.format(name=name, known=', '.join(suite_names())),
                          {'suite': [name]})
    reports = run_suite(name, seed=config['seed'], paths=config['paths'], workers=config['workers'])
    dumped = dump_reports(reports)
    _emit(json.dumps(dumped, indent=2) + '\n', config['out'])
    print(summary_table(reports), file=sys.stderr)

    if config['archive']:
        seed = config['seed'] if config['seed'] is not None else get_config().get('verification.seed', 0)
        repository = None
        try:
            repository = open_archive(config['archive'])
            repository.save_run(name, seed, dumped)
        except DatabaseError as e:
            raise ConfigError(str(e), {'archive': [config['archive']]})
        finally:
            if repository is not None:
                repository.db_manager.close()
    return EXIT_OK if suite_passed(reports) else EXIT_VERIFICATION_FAILED


COMMAND_HANDLERS = {
    'price-bond': cmd_price_bond,
    'yield-curve': cmd_yield_curve,
    'price-option': cmd_price_option,
    'simulate': cmd_simulate,
    'verify': cmd_verify,
}


def _fail(command: str, code: int, body: dict) -> int:
    logger.error(LogMessages.COMMAND_FAILED.format(command=command, code=code, error=body.get('message', body)))
    print(json.dumps(body, indent=2, default=str), file=sys.stderr)
    return code


def serve(args: argparse.Namespace) -> int:
    from app.server import PricingServer
    PricingServer().run(debug=args.debug or None, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG_ERROR

    configure_logging(get_config(), args.log_level)
    if args.command == 'serve':
        return serve(args)

    logger.debug(LogMessages.COMMAND_STARTED.format(command=args.command))
    try:
        config = run_config_schema.load(raw_run_config(args))
        return COMMAND_HANDLERS[args.command](config)
    except ConfigError as e:
        return _fail(args.command, EXIT_CONFIG_ERROR, e.to_dict())
    except ValidationError as e:
        return _fail(args.command, EXIT_CONFIG_ERROR, format_validation_error(e))
    except PricingError as e:
        return _fail(args.command, EXIT_NUMERICAL_FAILURE, e.to_dict())
    except OSError as e:
        return _fail(args.command, EXIT_CONFIG_ERROR, {'error': ErrorMessages.VALIDATION_ERROR, 'message': str(e)})


if __name__ == '__main__':
    sys.exit(main())

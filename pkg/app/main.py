# Defines the qcorr command-line interface: sweep, validate and table1 subcommands

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from quantum.errors import InvalidArgumentError, NumericalFailureError

from . import settings
from .dynamics_engine import run_config
from .models import RunConfig
from .report import write_run
from .validation import GREEN, RED, RESET, TABLE_ROWS, load_table_configs, print_checks, run_validation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CONFIG_ERRORS = (ValidationError, json.JSONDecodeError, InvalidArgumentError, FileNotFoundError)


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.log_level(),
        format=settings.LOG_FORMAT,
    )


def _guard(func):
    """Map library errors onto exit codes."""
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except CONFIG_ERRORS as e:
            logger.error(f'Invalid configuration: {e}')
            print(f'error: {e}', file=sys.stderr)
            return EXIT_CONFIG
        except NumericalFailureError as e:
            logger.error(f'Numerical failure: {e}')
            print(f'numerical failure: {e}', file=sys.stderr)
            return EXIT_NUMERICAL
    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


# ─────────────────────────────
# COMMANDS
# ─────────────────────────────

@_guard
def cmd_sweep(config_path, out_dir: Optional[str] = None) -> int:
    """Run one config and write trajectory.csv, crossings.json and verdict.json."""
    path = Path(config_path)
    config = RunConfig.from_file(path)
    target = Path(out_dir or config.output_dir or settings.output_root() / config.name)
    result = run_config(config)
    write_run(result, target)
    print(f'{config.name}: {result.verdict.label} '
          f'(decay_order_ok={result.verdict.decay_order_ok}, '
          f'revival_order_ok={result.verdict.revival_order_ok}) -> {target}')
    return EXIT_OK


@_guard
def cmd_validate(config_dir: Optional[str] = None, n_points: Optional[int] = None,
                 literal_pd_kraus: bool = False) -> int:
    """Run the invariant suite; exit 0 only if every check passes."""
    checks = run_validation(Path(config_dir) if config_dir else settings.config_dir(),
                            n_points=n_points, literal_pd_kraus=literal_pd_kraus)
    print_checks(checks)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED


@_guard
def cmd_table1(out_dir: Optional[str] = None, config_dir: Optional[str] = None,
               n_points: Optional[int] = None) -> int:
    """Run every reference row and compare its decay/revival label with the expected one."""
    configs = load_table_configs(Path(config_dir) if config_dir else settings.config_dir(), n_points)
    mismatches = 0
    print(f"{'row':<30}{'expected':<10}{'got':<10}{'decay_ok':<10}{'revival_ok':<12}")
    for label, filename, expected in TABLE_ROWS:
        config = configs[filename]
        result = run_config(config)
        verdict = result.verdict
        if out_dir:
            write_run(result, Path(out_dir) / config.name)
        ok = (verdict.label == expected and verdict.decay_order_ok
              and verdict.revival_order_ok is not False)
        mismatches += not ok
        color = GREEN if ok else RED
        print(color + f'{label:<30}{expected:<10}{verdict.label:<10}'
                      f'{str(verdict.decay_order_ok):<10}{str(verdict.revival_order_ok):<12}' + RESET)
    print("-----------------------------------------------------------------")
    print(f'{len(TABLE_ROWS) - mismatches} of {len(TABLE_ROWS)} rows reproduced')
    return EXIT_OK if mismatches == 0 else EXIT_FAILED


# ─────────────────────────────
# ARGUMENTS
# ─────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='qcorr', description='Two-qubit quantum correlations under open-system noise')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p_sweep = sub.add_parser('sweep', help='run one JSON config')
    p_sweep.add_argument('config', help='path to a run config')
    p_sweep.add_argument('--out', help='output directory (overrides output_dir and QCORR_OUT)')

    p_validate = sub.add_parser('validate', help='run the invariant suite')
    p_validate.add_argument('--config-dir', help='directory of shipped configs')
    p_validate.add_argument('--n-points', type=int, help='override grid size of every config')
    p_validate.add_argument('--literal-pd-kraus', action='store_true',
                            help="use the non-trace-preserving dephasing operator diag(1, sqrt(p)) (expected to fail)")

    p_table = sub.add_parser('table1', help="reproduce the reference decay/revival verdicts")
    p_table.add_argument('--out', help='write every row under DIR/<config name>')
    p_table.add_argument('--config-dir', help='directory of shipped configs')
    p_table.add_argument('--n-points', type=int, help='override grid size of every row')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    if args.command == 'sweep':
        return cmd_sweep(args.config, out_dir=args.out)
    if args.command == 'validate':
        return cmd_validate(args.config_dir, args.n_points, args.literal_pd_kraus)
    return cmd_table1(args.out, args.config_dir, args.n_points)


if __name__ == '__main__':
    sys.exit(main())

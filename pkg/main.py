"""
Entry point for riccati-peer.
Parses the command line and hands a RunConfig to the harness.
"""
import argparse
import sys
from fractions import Fraction
from typing import List, Optional

from config.constants import ADI_MAX_ITER, DEFAULT_LOG_LEVEL, NEWTON_MAX_ITER, NEWTON_TOL, STARTUP_SUBSTEPS
from harness import RunConfig, default_jobs, run
from shared.log import configure_logging


def parse_taus(text: str) -> List[float]:
    """Comma separated step sizes; fractions such as 1/100 are accepted."""
    try:
        return [float(Fraction(token.strip())) for token in text.split(',') if token.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid step size list: '{text}'")


def split_schemes(values: Optional[List[str]]) -> List[str]:
    """Flatten repeated and comma separated --scheme values."""
    schemes = []
    for value in values or []:
        schemes.extend(token.strip() for token in value.split(',') if token.strip())
    return schemes


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--problem', default='fdm-ltv', help='preset name or problem directory')
    common.add_argument('--n0', type=int, help='grid points per direction for FDM presets')
    common.add_argument('--scheme', action='append', help='scheme label, repeatable or comma separated')
    common.add_argument('--coeffs', help='coefficient set name or file')
    common.add_argument('--tau', type=parse_taus, default=[], help='step size(s), e.g. 0.01 or 1/100,1/200')
    common.add_argument('--steps', type=int, help='steps of the largest tau; sets the end time')
    common.add_argument('--newton-tol', type=float, default=NEWTON_TOL)
    common.add_argument('--newton-max', type=int, default=NEWTON_MAX_ITER)
    common.add_argument('--adi-max', type=int, default=ADI_MAX_ITER)
    common.add_argument('--adi-tol', type=float)
    common.add_argument('--compress-tol', type=float)
    common.add_argument('--startup-substeps', type=int, default=STARTUP_SUBSTEPS)
    common.add_argument('--out', default='results', help='output directory')
    common.add_argument('--jobs', type=int, help='worker threads for independent runs (default: cores, at most 4)')
    common.add_argument('-v', '--log-level', default=DEFAULT_LOG_LEVEL)
    common.add_argument('--log-json', help='also write JSON-lines log records to this file')

    parser = argparse.ArgumentParser(prog='riccati-peer',
                                     description='Low-rank peer integrators for differential Riccati equations')
    commands = parser.add_subparsers(dest='command', required=True)
    solve = commands.add_parser('solve', parents=[common], help='integrate one scheme')
    solve.add_argument('--dump-endpoint', action='store_true', help='write the final factors to endpoint.npz')
    commands.add_parser('convergence', parents=[common], help='errors over a list of step sizes')
    commands.add_parser('compare', parents=[common], help='several schemes at one step size')
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        problem=args.problem,
        n0=args.n0,
        schemes=split_schemes(args.scheme),
        coeffs=args.coeffs,
        taus=list(args.tau),
        steps=args.steps,
        newton_tol=args.newton_tol,
        newton_max=args.newton_max,
        adi_max=args.adi_max,
        adi_tol=args.adi_tol,
        compress_tol=args.compress_tol,
        startup_substeps=args.startup_substeps,
        out=args.out,
        jobs=args.jobs if args.jobs is not None else default_jobs(),
        dump_endpoint=getattr(args, 'dump_endpoint', False),
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Runs one CLI command and returns its exit code."""
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level, args.log_json)
    except ValueError:
        print(f"error: unknown log level '{args.log_level}'", file=sys.stderr)
        return 2

    print(f"Starting riccati-peer {args.command}...")
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())

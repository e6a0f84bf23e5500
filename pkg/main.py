import sys
import argparse

from plv.exceptions import PlvError
from main_helper import cmd_simulate, cmd_analyze, cmd_report

# 128 plus SIGINT, as a shell reports it
INTERRUPTED_EXIT_CODE = 130


def validate_arguments(args):
    if args.threads < 1:
        raise ValueError("Number of threads must be at least 1.")
    if args.verbose < 0:
        raise ValueError("Verbosity level must be at least 0.")
    return args


def import_user_arguments(argv=None):
    # import user arguments
    parser = argparse.ArgumentParser(description="Phase-locking value connectivity of EEG imagery tasks")
    parser.add_argument(
        "--threads", type=int, default=1,
        help="Number of (subject, paradigm) units to process at once. \
            Results are identical for any number of threads.")
    parser.add_argument(
        "--verbose", type=int, default=1,
        help="Verbosity level.")
    parser.add_argument(
        "--logging", action='store_true',
        help="Wether to append progress messages to log files in the output directory.")
    subparsers = parser.add_subparsers(dest='command', required=True)
    simulate = subparsers.add_parser(
        'simulate', help="Generate a synthetic study with known phase coupling.")
    simulate.add_argument(
        "--spec", type=str, required=True,
        help="Path to the simulation spec (INI).")
    simulate.add_argument(
        "--out", type=str, required=True,
        help="Directory the recordings and the ground-truth manifest are written to.")
    analyze = subparsers.add_parser(
        'analyze', help="Compute class tables and region reports.")
    analyze.add_argument(
        "--config", type=str, required=True,
        help="Path to the analysis config (INI). PLV_OUTPUT_DIR overrides its output directory.")
    report = subparsers.add_parser(
        'report', help="Print the tables of an analysis directory.")
    report.add_argument(
        "--dir", type=str, required=True, dest='directory',
        help="Analysis output directory.")
    args = parser.parse_args(argv)
    try:
        validate_arguments(args)
    except ValueError as exception:
        parser.error(str(exception))
    return args


def main(argv=None) -> int:
    args = import_user_arguments(argv)
    try:
        if args.command == 'simulate':
            cmd_simulate(spec=args.spec, out=args.out, threads=args.threads, verbose=args.verbose, logging=args.logging)
        elif args.command == 'analyze':
            cmd_analyze(config=args.config, threads=args.threads, verbose=args.verbose, logging=args.logging)
        else:
            cmd_report(directory=args.directory)
    except PlvError as exception:
        print(f"error: {exception}", file=sys.stderr)
        return exception.exit_code
    except KeyboardInterrupt:
        print("interrupted.", file=sys.stderr)
        return INTERRUPTED_EXIT_CODE
    return 0


if __name__ == "__main__":
    sys.exit(main())

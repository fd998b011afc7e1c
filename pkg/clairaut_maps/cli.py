"""
Command-line interface for the verification toolkit.

    clairaut-maps run <scenario> [--out DIR] [--tol X] [--seed N] [--literal-metric]
    clairaut-maps list
    clairaut-maps trace <scenario> <geodesic>
    clairaut-maps validate <scenario>

Exit codes: 0 when every non-gated check meets its expectation, 1 when a
check does not, 2 on invalid input.
"""

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from clairaut_maps.config import ScenarioValidator, VerificationSettings, get_scenario_manager
from clairaut_maps.models import ClairautMapsError, ScenarioError
from clairaut_maps.runner import ScenarioRunner, report_json

import logging
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_INPUT_ERROR = 2
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog='clairaut-maps',
        description="Verify Clairaut, Ricci soliton and anti-invariant properties of Riemannian maps")
    parser.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level (default: settings log_level, env CLAIRAUT_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run every check of a scenario")
    run.add_argument("scenario", help="Scenario file or built-in scenario name")
    run.add_argument("--out", default=None,
                     help="Directory for report.json and traces/*.csv (default: print the report)")
    run.add_argument("--tol", type=float, default=None,
                     help="Residual tolerance forced on every check")
    run.add_argument("--seed", type=int, default=None, help="Random seed for sampled data")
    run.add_argument("--literal-metric", action="store_true",
                     help="Use the declared literal metrics; the report is marked nonconformant")

    commands.add_parser("list", help="List built-in scenarios")

    trace = commands.add_parser("trace", help="Write a geodesic trace as CSV to stdout")
    trace.add_argument("scenario", help="Scenario file or built-in scenario name")
    trace.add_argument("geodesic", help="Geodesic name within the scenario")
    trace.add_argument("--seed", type=int, default=None, help="Random seed for sampled data")

    validate = commands.add_parser("validate", help="Validate a scenario without running it")
    validate.add_argument("scenario", help="Scenario file or built-in scenario name")
    validate.add_argument("--literal-metric", action="store_true",
                          help="Validate with the declared literal metrics")

    return parser.parse_args(argv)


def configure_logging(level: str):
    logging.basicConfig(level=getattr(logging, level.upper(), logging.WARNING),
                        format=LOG_FORMAT, stream=sys.stderr)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if getattr(args, 'seed', None) is not None:
        overrides['seed'] = args.seed
    if getattr(args, 'tol', None) is not None:
        overrides['residual_tol'] = args.tol
    return overrides


def command_run(args: argparse.Namespace, settings: VerificationSettings) -> int:
    scenario = get_scenario_manager().load(args.scenario, settings, args.literal_metric,
                                           _overrides(args))
    runner = ScenarioRunner(scenario, args.tol)
    report = runner.run()
    if args.out:
        for path in runner.write_report(report, args.out):
            print(path)
    else:
        sys.stdout.write(report_json(report))
    for check in report.checks:
        if not check.satisfied:
            print(f"UNSATISFIED {check.name}: {check.verdict.value} (expected {check.expected.value})",
                  file=sys.stderr)
    return EXIT_OK if report.all_satisfied else EXIT_CHECK_FAILURE


def command_list(args: argparse.Namespace, settings: VerificationSettings) -> int:
    for entry in get_scenario_manager().list_scenarios():
        print(f"{entry['name']}\t{entry['description']}")
    return EXIT_OK


def command_trace(args: argparse.Namespace, settings: VerificationSettings) -> int:
    scenario = get_scenario_manager().load(args.scenario, settings, overrides=_overrides(args))
    frame = ScenarioRunner(scenario).trace_frame(args.geodesic)
    frame.to_csv(sys.stdout, index=False, float_format='%.17g')
    return EXIT_OK


def command_validate(args: argparse.Namespace, settings: VerificationSettings) -> int:
    scenario = get_scenario_manager().load(args.scenario, settings, args.literal_metric)
    result = ScenarioValidator().validate(scenario)
    print(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK if result.is_valid else EXIT_INPUT_ERROR


COMMANDS = {
    'run': command_run,
    'list': command_list,
    'trace': command_trace,
    'validate': command_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    try:
        settings = VerificationSettings.from_env()
    except ScenarioError as e:
        configure_logging(args.log_level or 'WARNING')
        logger.error(f"Invalid environment settings: {e}")
        return EXIT_INPUT_ERROR
    configure_logging(args.log_level or settings.log_level)

    try:
        return COMMANDS[args.command](args, settings)
    except ScenarioError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ClairautMapsError as e:
        # integration failures outside a check, e.g. for `trace`
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILURE


if __name__ == "__main__":
    sys.exit(main())

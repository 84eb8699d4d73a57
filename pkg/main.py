"""
qiup-sim command line
Simulate frames, reconstruct images, emit design and metrology reports and
run the oracle check
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

from services.errors import QiupError, ValidationError
from run_scenarios.configs.run_config import RunConfig, parse_override
from run_scenarios.configs.simulation_config import SimulationConfig
from run_scenarios.scenarios import OracleCheckScenario, ReconstructScenario, ReportScenario, SimulateScenario
from run_scenarios.scenarios.reconstruct import METHODS
from run_scenarios.scenarios.report import KINDS

EXIT_OK = 0
EXIT_FAILURE = 1

logger = logging.getLogger('qiup_sim')


def setup_logging(verbose: bool = False, log_file: Optional[str] = None):
    """Setup logging configuration"""
    config = SimulationConfig.get_logging_config()
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, config['level']),
        format=config['format'],
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='qiup-sim', description=__doc__.strip().splitlines()[0])
    parser.add_argument('--verbose', '-v', action='store_true', help='debug logging')
    parser.add_argument('--log-file', help='also write the log to this file')
    sub = parser.add_subparsers(dest='command', required=True)

    simulate = sub.add_parser('simulate', help='synthesize a phase-scanned frame stack')
    simulate.add_argument('config', help='INI run configuration')
    simulate.add_argument('--set', dest='overrides', action='append', default=[], metavar='SECTION.KEY=VALUE',
                          help='override a config key (repeatable)')
    simulate.add_argument('--overwrite', action='store_true', help='replace an existing output directory')

    reconstruct = sub.add_parser('reconstruct', help='reconstruct magnitude and phase maps')
    reconstruct.add_argument('frames_dir', help='directory written by simulate')
    reconstruct.add_argument('--method', choices=METHODS, default='phase-stepping')
    reconstruct.add_argument('--output', help='output directory (default: inside frames_dir)')
    reconstruct.add_argument('--guard-px', type=int, help='border excluded from off-axis error metrics')
    reconstruct.add_argument('--overwrite', action='store_true', help='replace an existing output directory')

    report = sub.add_parser('report', help='design, comparison-table or metrology report')
    report.add_argument('kind', choices=KINDS)
    report.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                        help='report parameter, e.g. setup=microscopy or r_max=2 (repeatable)')
    report.add_argument('--output', help='write JSON/text (and xlsx/csv) files to this directory')
    report.add_argument('--overwrite', action='store_true', help='replace an existing output directory')

    oracle = sub.add_parser('oracle-check', help='closed forms vs state-vector oracle')
    oracle.add_argument('--grid', nargs=3, type=int, default=[10, 10, 4], metavar=('N_T', 'N_PHI', 'N_GAMMA'),
                        help='grid sizes for |T|, phi and gamma')
    oracle.add_argument('--output', help='write oracle_report.json to this directory')
    oracle.add_argument('--overwrite', action='store_true', help='replace an existing output directory')
    oracle.add_argument('--inject-bug', action='store_true', help=argparse.SUPPRESS)
    return parser


def _report_params(kind: str, overrides: Sequence[str]) -> Dict[str, str]:
    params = {}
    for text in overrides:
        if '.' in text.split('=', 1)[0]:
            section, key, value = parse_override(text)
            if section != kind:
                raise ValidationError(f"override {text!r} does not belong to the {kind} report")
        else:
            if '=' not in text:
                raise ValidationError(f"report parameter {text!r} must look like key=value")
            key, value = (part.strip() for part in text.split('=', 1))
        params[key] = value
    return params


def create_scenario(args: argparse.Namespace):
    if args.command == 'simulate':
        run_config = RunConfig.from_file(args.config, args.overrides)
        return SimulateScenario(run_config, overwrite=args.overwrite)
    if args.command == 'reconstruct':
        return ReconstructScenario(args.frames_dir, args.method, args.output, args.overwrite, args.guard_px)
    if args.command == 'report':
        return ReportScenario(args.kind, _report_params(args.kind, args.overrides), args.output, args.overwrite)
    return OracleCheckScenario(args.grid, inject_bug=args.inject_bug, output_dir=args.output,
                               overwrite=args.overwrite)


def _print_result(args: argparse.Namespace, scenario):
    if args.command == 'report':
        sys.stdout.write(scenario.text)
    elif args.command == 'oracle-check':
        report = scenario.report_dict
        status = 'PASS' if report.get('passed') else 'FAIL'
        print(f"{status}: {report.get('points', 0)} points, max delta {report.get('max_delta', 0.0):.3e}")
    elif args.command == 'reconstruct':
        for key in ('magnitude_rms', 'phase_rms_rad', 'phase_rms_vs_stepping_rad'):
            if key in scenario.summary:
                print(f"{key} = {scenario.summary[key]:.6g}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.log_file)

    try:
        scenario = create_scenario(args)
    except QiupError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    success = scenario.run()
    if args.command in ('report', 'oracle-check') or success:
        _print_result(args, scenario)
    if success:
        return EXIT_OK

    error = scenario.last_error
    if isinstance(error, QiupError):
        return error.exit_code
    return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())

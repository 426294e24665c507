"""fmpbem-run: frequency sweeps of periodic-array scattering scenes"""
import sys
import os
import argparse
from pathlib import Path
from datetime import datetime
from typing import List, Optional

from fmpbem.numerics.errors import ConfigurationError, FmpbemError
from fmpbem.runner.cli.scene_runner import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, SceneRunner
from fmpbem.runner.fmpbem_tools.yaml_scene_validator import Method, YAMLSceneValidator
from fmpbem.runner.fmpbem_tools.yaml_solver_config_reader import DEFAULT_CONFIG_PATH, SolverConfigReader
from fmpbem.runner.logging_module.system_logger import LogLevel, SystemLogger

RUNNER_DIR = Path(__file__).parent
ETC_DIR = RUNNER_DIR / "etc"
SCENES_DIR = ETC_DIR / "scenes"

AXES = {'x': 0, 'y': 1, 'z': 2, '0': 0, '1': 1, '2': 2}


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = _ArgumentParser(
        prog='fmpbem-run',
        description='Acoustic scattering by finite periodic arrays: dense BEM, PBEM and FMPBEM sweeps',
        epilog=f"Scene templates: {SCENES_DIR}"
    )
    parser.add_argument('--config', required=True, metavar='PATH',
                        help='Scene YAML file')
    parser.add_argument('--method', choices=[m.value for m in Method],
                        help='Override the method of the scene file')
    parser.add_argument('--threads', type=int, metavar='N',
                        help='Frequencies solved concurrently (default from the solver configuration)')
    parser.add_argument('--output', metavar='DIR',
                        help='Output directory (default from the scene file)')
    parser.add_argument('--verbose', '-v', action='store_true',
                        help='Console logging at DEBUG level')
    parser.add_argument('--validate-only', action='store_true',
                        help='Only validate the scene file without solving')
    parser.add_argument('--benchmark', nargs='+', metavar=('AXIS', 'SIZES'),
                        help='Time assembly and one matvec of every backend while the lattice count '
                             'along AXIS (x, y or z) takes each of SIZES')
    parser.add_argument('--solver-config', metavar='PATH',
                        help=f'Solver configuration YAML (default {DEFAULT_CONFIG_PATH})')
    args = parser.parse_args(argv)

    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    if args.benchmark is not None:
        axis, *sizes = args.benchmark
        if axis.lower() not in AXES or not sizes:
            parser.error("--benchmark needs an axis (x, y or z) followed by at least one size")
        try:
            args.benchmark_sizes = [int(s) for s in sizes]
        except ValueError:
            parser.error("--benchmark sizes must be integers")
        if min(args.benchmark_sizes) < 1:
            parser.error("--benchmark sizes must be >= 1")
        args.benchmark_axis = AXES[axis.lower()]
    return args


def initialize_system_logger(config: SolverConfigReader, verbose: bool = False) -> Optional[SystemLogger]:
    """
    Initialize the system logger from the logging section.
    Returns: SystemLogger instance or None if logging is disabled
    """
    if not config.get_logs_enabled() and not verbose:
        return None

    log_file = None
    log_dir = config.get_logs_path()
    if config.get_logs_enabled() and log_dir is not None:
        os.makedirs(log_dir, exist_ok=True)
        datestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
        log_file = os.path.join(log_dir, f"FMPBEM_{datestamp}.log")

    # CLI runs: --verbose forces console output at DEBUG, otherwise the console stays quiet
    level = LogLevel.DEBUG if verbose else LogLevel[config.get_logs_level()]
    enable_console = verbose
    logger = SystemLogger(log_level=level, log_file=log_file, enable_console=enable_console)
    logger.log_info("System logger initialized", "main",
                    {"log_level": level.value, "log_file": log_file, "enable_console": enable_console})
    return logger


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of fmpbem-run.

    Exit codes: 0 success, 1 usage/parse/validation error, 2 numerical failure.
    """
    args = parse_arguments(argv)

    try:
        config = SolverConfigReader(args.solver_config)
    except Exception as e:
        print(f"*******Failed to read the solver configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        logger = initialize_system_logger(config, args.verbose)
    except (OSError, KeyError) as e:
        print(f"*******Failed to initialize logging: {e}", file=sys.stderr)
        return EXIT_USAGE

    validator = YAMLSceneValidator(args.config, defaults=config)
    if not validator.is_valid():
        print(f"Scene file '{args.config}' is invalid:", file=sys.stderr)
        for error in validator.get_errors():
            print(f"  {error}", file=sys.stderr)
        if logger is not None:
            logger.log_error("Scene file validation failed", "main", metadata={"errors": validator.get_errors()})
        return EXIT_USAGE

    scene = validator.get_scene()
    if args.method:
        scene = scene.with_method(args.method)
    if args.validate_only:
        print(f"Scene file '{args.config}' is valid ({scene.method.value}, "
              f"{len(scene.sweep.frequencies())} frequencies)")
        return EXIT_OK

    runner = SceneRunner(logger=logger, config=config, threads=args.threads)
    try:
        if args.benchmark is not None:
            path = runner.benchmark(scene, args.benchmark_axis, args.benchmark_sizes, output_dir=args.output)
            print(f"Benchmark written to {path}")
            return EXIT_OK

        sweep = runner.run_scene(scene, output_dir=args.output)
    except ConfigurationError as e:
        print(f"*******Invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FmpbemError as e:
        print(f"*******Numerical failure: {e}", file=sys.stderr)
        if logger is not None:
            logger.log_error("Run aborted", "main", exception=e)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"*******Cannot write outputs: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("\nDetected Ctrl+C, exiting gracefully.", file=sys.stderr)
        return EXIT_USAGE

    for result in sweep.failed:
        print(f"{result.frequency:g} Hz failed: {result.error}", file=sys.stderr)
    for result in sweep.unconverged:
        print(f"{result.frequency:g} Hz: GMRES did not converge (residual {result.residual:.3e})",
              file=sys.stderr)
    print(f"Results written to {sweep.output_dir}")
    return sweep.exit_status


if __name__ == "__main__":
    sys.exit(main())

"""
Main Application Module

Command-line entry point for the gray-level binarization toolkit.
Run as `python -m src.main <command> ...`; results go to files or stdout,
diagnostics to stderr.

Exit codes: 0 success, 1 domain or file error, 2 usage or configuration error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .config.config_manager import ConfigManager, reload_config
from .config.logging_config import setup_logging
from .config.validator import validate_config
from .errors import BinarizationError
from .simulation.acquisition import generate_stack
from .speed.compensation import build_table, lookup, scale_calibration
from .storage.maps import load_calibration, save_calibration, write_threshold_map
from .storage.pgm import read_pgm, write_binary_image
from .storage.sim_config import read_simulation_config
from .storage.speed_csv import open_speed_table, read_speed_calibration, write_speed_table
from .storage.stack import read_masks, read_stack, write_stack
from .threshold.dynamic import default_region_size, dynamic_binarize
from .threshold.global_threshold import binarize, fit_global
from .threshold.temporal import apply, calibrate, compare_with_global, quality_report

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE_ERROR = 2


def region_size(value: str) -> Tuple[int, int]:
    """argparse type for WxH region sizes"""
    try:
        width, height = (int(part) for part in value.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"region must be WxH, got '{value}'")
    return width, height


class BinarizationToolkit:
    """Command runner: loads configuration and logging, then dispatches one command"""

    def __init__(self) -> None:
        self.config: Optional[ConfigManager] = None
        self.logger: Optional[logging.Logger] = None
        self.commands: Dict[str, Callable[[argparse.Namespace], int]] = {
            'fit-global': self.fit_global,
            'binarize-global': self.binarize_global,
            'binarize-dynamic': self.binarize_dynamic,
            'calibrate-temporal': self.calibrate_temporal,
            'binarize-temporal': self.binarize_temporal,
            'quality-report': self.quality_report,
            'compare-global': self.compare_global,
            'build-speed-table': self.build_speed_table,
            'lookup-speed': self.lookup_speed,
            'simulate': self.simulate,
        }

    def load_configuration(self, debug: bool = False) -> bool:
        """Load application configuration"""
        if debug:
            os.environ['DEBUG'] = 'true'
            os.environ['LOG_LEVEL'] = 'DEBUG'
        if not validate_config():
            return False
        self.config = reload_config()
        return True

    def setup_logging(self) -> None:
        """Setup logging system"""
        if not self.config:
            raise RuntimeError("Configuration not loaded")

        log_config = {
            "log_level": self.config.log_level,
            "log_file": self.config.log_file,
            "debug": self.config.debug
        }
        setup_logging(log_config)
        self.logger = logging.getLogger(__name__)

    def run(self, args: argparse.Namespace) -> int:
        if not self.load_configuration(debug=args.debug):
            print("Configuration validation failed", file=sys.stderr)
            return EXIT_USAGE_ERROR
        self.setup_logging()
        self.logger.debug(f"Running {args.command}")

        try:
            return self.commands[args.command](args)
        except BinarizationError as e:
            self.logger.debug(f"{args.command} failed", exc_info=True)
            print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
            return EXIT_DOMAIN_ERROR
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_DOMAIN_ERROR

    def _workers(self, args: argparse.Namespace) -> int:
        return args.workers if args.workers is not None else self.config.workers

    # Commands

    def fit_global(self, args: argparse.Namespace) -> int:
        fit = fit_global(read_pgm(args.image))
        print(f"mixture: {fit.mixture.describe()}")
        print(f"threshold: {fit.result.threshold:.6f}")
        print(f"method: {fit.result.method.value}")
        print(f"expected_error: {fit.result.expected_error:.6e}")
        print(f"fit_error: {fit.fit_error:.6e}")
        return EXIT_OK

    def binarize_global(self, args: argparse.Namespace) -> int:
        image = read_pgm(args.image)
        fit = fit_global(image)
        write_binary_image(args.output, binarize(image, fit.result.threshold))
        print(f"threshold: {fit.result.threshold:.6f}")
        return EXIT_OK

    def binarize_dynamic(self, args: argparse.Namespace) -> int:
        image = read_pgm(args.image)
        size = args.region or default_region_size(
            image,
            (self.config.region_width, self.config.region_height),
            self.config.linear_region_width,
        )
        tolerance = args.tolerance if args.tolerance is not None else self.config.bimodal_tolerance
        binary, threshold_map = dynamic_binarize(image, size, tolerance)
        write_binary_image(args.output, binary)
        if args.map:
            write_threshold_map(args.map, threshold_map)
        return EXIT_OK

    def calibrate_temporal(self, args: argparse.Namespace) -> int:
        stack = read_stack(args.manifest)
        calibration = calibrate(
            stack,
            min_frames=args.min_frames if args.min_frames is not None else self.config.min_frames,
            error_tolerance=args.tolerance if args.tolerance is not None else self.config.error_tolerance,
            workers=self._workers(args),
            fallback_sigmas=self.config.fallback_sigmas,
        )
        save_calibration(args.output, calibration)
        return EXIT_OK

    def binarize_temporal(self, args: argparse.Namespace) -> int:
        calibration = load_calibration(args.calibration)
        if args.speed is not None:
            calibration = scale_calibration(calibration, open_speed_table(args.table), args.speed)
        write_binary_image(args.output, apply(calibration, read_pgm(args.image)))
        return EXIT_OK

    def quality_report(self, args: argparse.Namespace) -> int:
        report = quality_report(load_calibration(args.calibration))
        for name, count in report.flag_counts.items():
            print(f"{name}: {count}")
        print(f"max_error: {report.max_error:.6e}")
        print(f"mean_error: {report.mean_error:.6e}")
        print(f"defect_areas: {report.defect_count}")
        for area in report.defect_areas:
            print(f"  x={area.x} y={area.y} width={area.width} height={area.height} pixels={area.pixels}")
        return EXIT_OK

    def compare_global(self, args: argparse.Namespace) -> int:
        stack = read_stack(args.manifest)
        comparison = compare_with_global(
            stack,
            truth=read_masks(args.manifest),
            min_frames=args.min_frames if args.min_frames is not None else self.config.min_frames,
            error_tolerance=args.tolerance if args.tolerance is not None else self.config.error_tolerance,
            workers=self._workers(args),
        )
        source = "observed" if comparison.from_ground_truth else "predicted"
        print(f"global_threshold: {comparison.global_threshold:.6f}")
        print(f"global_rate: {comparison.global_rate:.6e} ({source})")
        print(f"temporal_rate: {comparison.temporal_rate:.6e} ({source})")
        return EXIT_OK

    def build_speed_table(self, args: argparse.Namespace) -> int:
        write_speed_table(args.output, build_table(read_speed_calibration(args.calibration)))
        return EXIT_OK

    def lookup_speed(self, args: argparse.Namespace) -> int:
        print(f"{lookup(open_speed_table(args.table), args.speed):.6f}")
        return EXIT_OK

    def simulate(self, args: argparse.Namespace) -> int:
        simulation = read_simulation_config(args.config)
        simulated = generate_stack(simulation.model, simulation.frame_count, simulation.speed,
                                   workers=self._workers(args))
        manifest = write_stack(Path(args.output), simulated.stack, simulated.masks, seed=simulation.model.seed)
        print(manifest)
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binarize", description="Gray-level image binarization toolkit")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    command = subparsers.add_parser("fit-global", help="Fit the image histogram and print mixture, T, E and M")
    command.add_argument("image")

    command = subparsers.add_parser("binarize-global", help="Binarize with the optimal global threshold")
    command.add_argument("image")
    command.add_argument("output")

    command = subparsers.add_parser("binarize-dynamic", help="Binarize with a region-interpolated threshold map")
    command.add_argument("image")
    command.add_argument("output")
    command.add_argument("--region", type=region_size, help="Region size WxH")
    command.add_argument("--tolerance", type=float, help="Bimodal fit tolerance M")
    command.add_argument("--map", help="Also write the threshold map to this file")

    command = subparsers.add_parser("calibrate-temporal", help="Fit per-pixel thresholds from a frame stack")
    command.add_argument("manifest")
    command.add_argument("output")
    command.add_argument("--min-frames", type=int)
    command.add_argument("--tolerance", type=float, help="Misclassification error tolerance")
    command.add_argument("--workers", type=int)

    command = subparsers.add_parser("binarize-temporal", help="Binarize with a temporal calibration")
    command.add_argument("calibration")
    command.add_argument("image")
    command.add_argument("output")
    command.add_argument("--speed", type=float, help="Conveyor speed V in m/min")
    command.add_argument("--table", help="Speed table or speed calibration CSV")

    command = subparsers.add_parser("quality-report", help="Summarize a temporal calibration")
    command.add_argument("calibration")

    command = subparsers.add_parser("compare-global", help="Global versus temporal misclassification on a stack")
    command.add_argument("manifest")
    command.add_argument("--min-frames", type=int)
    command.add_argument("--tolerance", type=float)
    command.add_argument("--workers", type=int)

    command = subparsers.add_parser("build-speed-table", help="Build the 256-entry speed table from calibration CSV")
    command.add_argument("calibration")
    command.add_argument("output")

    command = subparsers.add_parser("lookup-speed", help="Print the threshold for a conveyor speed")
    command.add_argument("table")
    command.add_argument("speed", type=float)

    command = subparsers.add_parser("simulate", help="Generate a synthetic frame stack with ground truth")
    command.add_argument("config")
    command.add_argument("output")
    command.add_argument("--workers", type=int)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE_ERROR

    if args.command == "binarize-temporal" and (args.speed is None) != (args.table is None):
        print("error: --speed and --table must be given together", file=sys.stderr)
        return EXIT_USAGE_ERROR
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE_ERROR

    return BinarizationToolkit().run(args)


if __name__ == "__main__":
    sys.exit(main())

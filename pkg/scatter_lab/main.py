import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from scatter_lab.src.config import ExperimentConfig
from scatter_lab.src.experiments import COMMANDS
from scatter_lab.src.utils.logging_config import setup_logging
from scatter_lab.validation.error_handlers import ExitCode, LabErrorHandler
from scatter_lab.validation.exceptions import LabError

DEFAULT_CONFIG = Path(__file__).parent / 'config.yaml'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='scatter-lab',
        description="Scattering-control experiments for the acoustic wave inverse problem",
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, command in COMMANDS.items():
        sub = subparsers.add_parser(name, help=(command.__doc__ or '').strip().splitlines()[0])
        sub.add_argument('--config', default=str(DEFAULT_CONFIG), help="Experiment config (YAML)")
        sub.add_argument('--out', default=None, help="Output directory, overrides the config")
        sub.add_argument('--workers', type=int, default=None, help="Worker processes for scans")
        sub.add_argument('--mode', choices=('glassbox', 'outside'), default=None,
                         help="glassbox uses the true medium; outside reads only exterior data")
        sub.add_argument('--seed', type=int, default=None, help="Seed for random initial data")
        sub.add_argument('--log-file', default=None, help="Also write DEBUG logs to this file")
        sub.add_argument('--verbose', action='store_true', help="DEBUG logging on the console")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else logging.INFO, args.log_file)
    logger = logging.getLogger(__name__)
    handler = LabErrorHandler()

    try:
        config = ExperimentConfig.load_from_file(args.config).with_overrides(
            out=args.out, workers=args.workers, mode=args.mode, seed=args.seed,
        )
        logger.info(f"Running {args.command} with {args.config} into {config.out}")
        artifacts = COMMANDS[args.command](config)
    except (LabError, FileNotFoundError) as e:
        return int(handler.handle(e, args.command))
    logger.info(f"{args.command} finished: {', '.join(sorted(artifacts.files))}")
    return int(ExitCode.OK)


if __name__ == "__main__":
    sys.exit(main())

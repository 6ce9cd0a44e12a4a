"""Command-line entry point: synth, run and report."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from ringkit import __version__
from ringkit.config import settings
from ringkit.exceptions import ConfigError, DataError
from ringkit.schemas.experiment import DatasetConfig, ExperimentConfig
from ringkit.services.experiment_service import ExperimentService, rerender_report, synthesize_dataset

logger = logging.getLogger("ringkit")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str) -> None:
    """Install one stream handler on the package logger."""
    root = logging.getLogger("ringkit")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level.upper())
    root.propagate = False


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return payload


def _validation_message(path: str, exc: ValidationError) -> str:
    problems = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        problems.append(f"{location}: {error['msg']}")
    return f"{path}: invalid config: " + "; ".join(problems)


def load_experiment_config(path: str) -> ExperimentConfig:
    """
    Load and validate an experiment config file.

    Raises:
        ConfigError: If the file is unreadable or fails validation
    """
    payload = _read_json(path)
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(_validation_message(path, exc)) from exc


def load_dataset_config(path: str) -> DatasetConfig:
    """Dataset block of an experiment config, or a bare dataset config."""
    payload = _read_json(path)
    try:
        if "dataset" in payload:
            return ExperimentConfig.model_validate(payload).dataset
        return DatasetConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(_validation_message(path, exc)) from exc


def cmd_synth(args: argparse.Namespace) -> int:
    dataset = load_dataset_config(args.config)
    synthesize_dataset(dataset, args.out, jobs=args.jobs, seed=args.seed)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    if args.seed is not None:
        try:
            config = ExperimentConfig.model_validate({**config.model_dump(mode="json"), "seed": args.seed})
        except ValidationError as exc:
            raise ConfigError(_validation_message("--seed", exc)) from exc
    result = ExperimentService(config, jobs=args.jobs).run(args.out)
    print(result.run_dir / "report.csv")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    rerender_report(args.run, args.out)
    print(Path(args.out or args.run) / "report.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the synth, run and report subcommands."""
    parser = argparse.ArgumentParser(prog="ringkit", description="Ring PPG/ACC vital-sign toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="Debug logging and tracebacks")
    common.add_argument("--jobs", type=int, default=None, help="Worker processes (default: RINGKIT_JOBS)")

    subparsers = parser.add_subparsers(dest="command", required=True)

    synth = subparsers.add_parser("synth", parents=[common], help="Write synthetic session directories")
    synth.add_argument("--config", required=True, help="Experiment or dataset config (JSON)")
    synth.add_argument("--out", required=True, help="Dataset root to write")
    synth.add_argument("--seed", type=int, default=None, help="Override the cohort seed")
    synth.set_defaults(handler=cmd_synth)

    run = subparsers.add_parser("run", parents=[common], help="Run an experiment")
    run.add_argument("--config", required=True, help="Experiment config (JSON)")
    run.add_argument("--out", default=None, help="Run directory (default: config output_dir)")
    run.add_argument("--seed", type=int, default=None, help="Override the config seed")
    run.set_defaults(handler=cmd_run)

    report = subparsers.add_parser("report", parents=[common], help="Re-render reports from a run's pairs")
    report.add_argument("--run", required=True, help="Existing run directory")
    report.add_argument("--out", default=None, help="Where to write (default: the run directory)")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the subcommand and map failures to exit codes.

    Returns:
        0 on success, 2 on a config error, 3 on a data error, 1 otherwise
    """
    args = build_parser().parse_args(argv)
    configure_logging("DEBUG" if args.verbose else settings.LOG_LEVEL)
    if args.jobs is None:
        args.jobs = settings.JOBS
    if args.jobs < 1:
        logger.error("--jobs must be at least 1")
        return EXIT_CONFIG

    try:
        return args.handler(args)
    except ConfigError as exc:
        logger.error("Config error: %s", exc)
        return EXIT_CONFIG
    except DataError as exc:
        logger.error("Data error: %s", exc)
        return EXIT_DATA
    except Exception as exc:
        logger.error("Unexpected %s: %s", type(exc).__name__, exc, exc_info=args.verbose)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())

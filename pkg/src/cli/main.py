"""
rain: run, verify and sweep experiments.

Exit codes: 0 success, 1 verify found violations, 2 invalid config,
3 corrupt or unverifiable input, 4 fatal MAC abort, 5 protocol or domain
error raised mid-run.
"""

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

import structlog
from pydantic import ValidationError

from src.config import Settings, get_settings
from src.exceptions import ConfigError, DomainError, FatalAbortError, IntegrityError, ProtocolError
from src.harness.metrics import write_summary_csv
from src.harness.runner import run_experiment
from src.integrity.mac import derive_round_key
from src.integrity.offline import VerifyReport, offline_verify
from src.observability import configure_logging
from src.protocol.transcript import decode_dump
from src.ring.prg import seed_from_int
from src.schemas.experiment import (
    ExperimentConfig,
    RunMode,
    SweepAxis,
    format_validation_error,
    load_config,
)

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3
EXIT_FATAL_ABORT = 4
EXIT_PROTOCOL = 5

DEFAULT_OUTPUT_DIR = Path("runs")


def resolve_output_dir(cli_out: Path | None, settings: Settings, config: ExperimentConfig) -> Path:
    """--out, then RAIN_OUTPUT_DIR, then the config's output_dir, then ./runs."""
    for candidate in (cli_out, settings.output_dir, config.output_dir):
        if candidate is not None:
            return Path(candidate)
    return DEFAULT_OUTPUT_DIR


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(Path(args.config))
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = RunMode(args.mode)
    if overrides:
        try:
            config = config.with_overrides(**overrides)
        except ValidationError as exc:
            raise ConfigError(format_validation_error(exc)) from exc
    logger.info("Config validated", path=str(args.config), seed=config.seed, mode=config.mode.value)
    return config


def cmd_run(args: argparse.Namespace, settings: Settings) -> int:
    config = _load(args)
    out = resolve_output_dir(args.out, settings, config)
    summary = run_experiment(config, out)
    print(f"final_accuracy={summary.final_accuracy:.4f} aborted_rounds={summary.aborted_rounds} out={out}")
    return EXIT_OK


def _verify_file(path: Path, seed: bytes) -> VerifyReport:
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise IntegrityError(f"Cannot read transcript {path}: {exc}") from exc
    dump = decode_dump(buf)
    key = derive_round_key(seed, dump.round_index, dump.dimension, dump.modulus)
    return offline_verify(dump, key)


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    config = _load(args)
    target = Path(args.transcript)
    files = sorted(target.glob("round_*.bin")) if target.is_dir() else [target]
    if not files:
        raise IntegrityError(f"No transcript dumps under {target}")

    seed = seed_from_int(config.seed)
    failed = False
    for path in files:
        report = _verify_file(path, seed)
        if report.clean:
            print(f"{path.name}: round {report.round_index}, {report.slots} slots, clean")
            continue
        failed = True
        print(f"{path.name}: round {report.round_index}, {len(report.violations)} violation(s)")
        for violation in report.violations:
            print(f"  {violation}")
    return EXIT_VIOLATIONS if failed else EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    config = _load(args)
    if args.axis is not None:
        if not args.values:
            raise ConfigError("--axis needs --values")
        axis, values = SweepAxis(args.axis), list(args.values)
    elif config.sweep is not None:
        axis, values = config.sweep.axis, list(config.sweep.values)
    else:
        raise ConfigError("sweep: no axis given in the config or on the command line")

    out = resolve_output_dir(args.out, settings, config)
    summaries = []
    extras = []
    for value in sorted(values):
        try:
            point = config.with_axis(axis, value)
        except ValidationError as exc:
            raise ConfigError(f"{axis.value}={value}: {format_validation_error(exc)}") from exc
        run_dir = out / f"{axis.value}={value:g}"
        summaries.append(run_experiment(point, run_dir))
        extras.append({axis.value: value})

    merged = out / f"sweep_{axis.value}.csv"
    write_summary_csv(merged, summaries, extras)
    print(f"{len(summaries)} runs, merged summary at {merged}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rain", description="RAIN robust aggregation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one experiment")
    run.add_argument("--config", required=True, type=Path, help="Experiment YAML file")
    run.add_argument("--out", type=Path, default=None, help="Run directory")
    run.add_argument("--seed", type=int, default=None, help="Override the config seed")
    run.add_argument("--mode", choices=[m.value for m in RunMode], default=None)
    run.set_defaults(handler=cmd_run)

    verify = sub.add_parser("verify", help="Re-verify dumped transcripts offline")
    verify.add_argument("--config", required=True, type=Path, help="Config whose seed derives the keys")
    verify.add_argument("--transcript", required=True, type=Path, help="Dump file or transcripts/ dir")
    verify.add_argument("--seed", type=int, default=None, help="Override the config seed")
    verify.set_defaults(handler=cmd_verify)

    sweep = sub.add_parser("sweep", help="Run one experiment per axis value and merge summaries")
    sweep.add_argument("--config", required=True, type=Path)
    sweep.add_argument("--out", type=Path, default=None)
    sweep.add_argument("--axis", choices=[a.value for a in SweepAxis], default=None)
    sweep.add_argument("--values", type=float, nargs="+", default=None)
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--mode", choices=[m.value for m in RunMode], default=None)
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(settings.log_level, settings.log_format)
    try:
        return args.handler(args, settings)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FatalAbortError as exc:
        print(f"fatal abort: {exc}", file=sys.stderr)
        return EXIT_FATAL_ABORT
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (DomainError, ProtocolError) as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())

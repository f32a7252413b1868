"""Command-line surface: select, stream, synth, aggregate and experiment."""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from app.algorithms.data import load_csv, synth_generate, write_csv
from app.algorithms.rank import aggregate
from app.core.config import settings
from app.core.exceptions import AppException, ConfigError, UsageError
from app.core.records import RecordWriter, dump_record, read_records
from app.core.run_config import load_run_config
from app.core.seeding import resolve_seed
from app.models.config import RankOrientation, RunConfig
from app.services.experiments import EXPERIMENTS, ExperimentService
from app.services.selection import SelectionService
from app.services.streaming import StreamingService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="flat key = value run configuration")
    parser.add_argument("--dataset", type=Path, help="CSV with numeric feature columns and an optional label column")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", type=Path, help="directory for line-delimited records")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one dotted config key; repeatable",
    )


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="tsad-selector", description="Label-free detector selection for time series")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    _add_run_options(commands.add_parser("select", help="offline selection of both branches"))
    _add_run_options(commands.add_parser("stream", help="offline selection, then the online simulation"))

    synth = commands.add_parser("synth", help="write a synthetic labeled series")
    synth.add_argument("--kind", choices=("point", "contextual", "collective"), default="point")
    synth.add_argument("--length", type=int, default=1000)
    synth.add_argument("--dims", type=int, default=1)
    synth.add_argument("--anomalies", type=int, default=10)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--out", type=Path)

    agg = commands.add_parser("aggregate", help="fuse serialized rankings")
    agg.add_argument("rankings", type=Path, help="line-delimited records with an 'ids' list each")
    agg.add_argument(
        "--orientation",
        choices=[o.value for o in RankOrientation],
        default=RankOrientation.WINNER_MASS.value,
    )
    agg.add_argument("--out", type=Path)

    experiment = commands.add_parser("experiment", help="parameter sweeps and adaptation runs")
    experiment.add_argument("name", choices=EXPERIMENTS)
    experiment.add_argument("--seeds", type=int, nargs="+", help="seeds for the adaptation experiment")
    _add_run_options(experiment)
    return parser


def parse_overrides(pairs: Sequence[str]) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--set expects KEY=VALUE, got {pair!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def run_config(args: argparse.Namespace) -> RunConfig:
    overrides = parse_overrides(args.overrides)
    for key in ("dataset", "seed", "out"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = str(value)
    return load_run_config(args.config, overrides)


def _dataset(config: RunConfig, command: str) -> Path:
    if config.dataset is None:
        raise UsageError(f"{command} needs --dataset (or dataset in the config file)")
    return config.dataset


def _writer(config: RunConfig) -> RecordWriter:
    return RecordWriter(config.out or settings.OUTPUT_DIR)


def _emit(payload: object) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def cmd_select(args: argparse.Namespace) -> int:
    config = run_config(args)
    series = load_csv(_dataset(config, "select"))
    result = SelectionService(config, writer=_writer(config)).run_offline(series)
    _emit({"ensemble": result.report.ensemble.detector_ids, "final": result.report.final.ids})
    return EXIT_OK


def cmd_stream(args: argparse.Namespace) -> int:
    config = run_config(args)
    series = load_csv(_dataset(config, "stream"))
    run = StreamingService(SelectionService(config, writer=_writer(config))).run_online(series)
    _emit(run.summary.model_dump(mode="json"))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    seed = resolve_seed(args.seed)
    series = synth_generate(args.kind, args.length, args.dims, args.anomalies, seed)
    out = args.out or settings.OUTPUT_DIR
    out.mkdir(parents=True, exist_ok=True)
    path = write_csv(series, out / f"synth_{args.kind}_{seed}.csv")
    _emit({"path": str(path), "length": series.length, "anomalies": int(series.labels_or_zeros().sum())})
    return EXIT_OK


def cmd_aggregate(args: argparse.Namespace) -> int:
    if not args.rankings.is_file():
        raise UsageError(f"rankings file not found: {args.rankings}")
    records = read_records(args.rankings)
    rankings = [record.get("ids", record.get("value")) for record in records]
    if not rankings or not all(isinstance(r, list) for r in rankings):
        raise UsageError("each rankings record needs an 'ids' list")
    result = aggregate(rankings, RankOrientation(args.orientation))
    if args.out is not None:
        RecordWriter(args.out).write("aggregate", [result])
    sys.stdout.write(dump_record(result) + "\n")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    config = run_config(args)
    series = load_csv(_dataset(config, "experiment"))
    service = ExperimentService(config, writer=_writer(config))
    options = {"seeds": args.seeds} if args.name == "adaptation" and args.seeds else {}
    rows = service.run(args.name, series, **options)
    for row in rows:
        sys.stdout.write(dump_record(row) + "\n")
    return EXIT_OK


COMMANDS = {
    "select": cmd_select,
    "stream": cmd_stream,
    "synth": cmd_synth,
    "aggregate": cmd_aggregate,
    "experiment": cmd_experiment,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc.detail}\n{parser.format_usage()}")
        return EXIT_USAGE
    except AppException as exc:
        logger.error("%s (%s)", exc.detail, exc.error_code)
        return EXIT_FAILURE
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_FAILURE


def main() -> None:
    sys.exit(cli_main())

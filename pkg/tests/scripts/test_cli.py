import json
from pathlib import Path

import pytest

from app.algorithms.data import load_csv, write_csv
from app import cli
from app.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, cli_main, parse_overrides
from app.core.exceptions import UsageError
from app.models.series import TimeSeries
from tests.utils.utils import fast_config_values, flatten_config


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "run.cfg"
    lines = [f"{key} = {value}" for key, value in flatten_config(fast_config_values()).items()]
    path.write_text("# fast run\n" + "\n".join(lines) + "\n")
    return path


@pytest.fixture
def dataset(tmp_path: Path, point_series: TimeSeries) -> Path:
    return write_csv(point_series, tmp_path / "point.csv")


def test_synth_writes_csv(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code = cli_main(["synth", "--length", "120", "--anomalies", "2", "--seed", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    path = Path(payload["path"])
    assert path == tmp_path / "synth_point_1.csv"
    series = load_csv(path)
    assert series.length == payload["length"] == 120
    assert payload["anomalies"] == int(series.labels_or_zeros().sum())


def test_select_runs_offline_selection(
    tmp_path: Path, config_file: Path, dataset: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    out = tmp_path / "records"
    code = cli_main(["select", "--config", str(config_file), "--dataset", str(dataset), "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert sorted(payload["final"]) == ["hbos_1", "knn_1", "md_1", "rm_1"]
    assert (out / "report.jsonl").is_file()


def test_select_without_dataset_is_usage_error(
    config_file: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    assert cli_main(["select", "--config", str(config_file)]) == EXIT_USAGE
    assert "--dataset" in capsys.readouterr().err


def test_missing_dataset_file_fails(tmp_path: Path, config_file: Path) -> None:
    code = cli_main(["select", "--config", str(config_file), "--dataset", str(tmp_path / "nope.csv")])
    assert code == EXIT_FAILURE


def test_bad_override_is_usage_error(dataset: Path) -> None:
    assert cli_main(["select", "--dataset", str(dataset), "--set", "ga.population"]) == EXIT_USAGE
    assert cli_main(["select", "--dataset", str(dataset), "--set", "ga.colonies=2"]) == EXIT_USAGE


def test_unknown_command_is_usage_error() -> None:
    assert cli_main(["explode"]) == EXIT_USAGE


def test_aggregate_rankings_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    rankings = tmp_path / "rankings.jsonl"
    rankings.write_text('{"ids": ["a", "b", "c"]}\n{"ids": ["a", "b", "c"]}\n')
    assert cli_main(["aggregate", str(rankings), "--out", str(tmp_path / "agg")]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["ranking"]["ids"] == ["a", "b", "c"]
    assert (tmp_path / "agg" / "aggregate.jsonl").is_file()


def test_aggregate_missing_file(tmp_path: Path) -> None:
    assert cli_main(["aggregate", str(tmp_path / "missing.jsonl")]) == EXIT_USAGE


def test_parse_overrides() -> None:
    assert parse_overrides(["ga.population = 8", "seed=3"]) == {"ga.population": "8", "seed": "3"}
    with pytest.raises(UsageError):
        parse_overrides(["=3"])


def test_malformed_rankings_line_fails(tmp_path: Path) -> None:
    rankings = tmp_path / "rankings.jsonl"
    rankings.write_text('{"ids": ["a", "b"]}\n{"ids": ["a",\n')
    assert cli_main(["aggregate", str(rankings)]) == EXIT_FAILURE


def test_non_utf8_dataset_fails(tmp_path: Path, config_file: Path) -> None:
    path = tmp_path / "latin.csv"
    path.write_bytes("f0,caf\xe9\n1.0,2.0\n".encode("latin-1"))
    code = cli_main(["select", "--config", str(config_file), "--dataset", str(path)])
    assert code == EXIT_FAILURE


def test_unexpected_error_maps_to_failure(monkeypatch: pytest.MonkeyPatch) -> None:
    def explode(_args: object) -> int:
        raise RuntimeError("boom")

    monkeypatch.setitem(cli.COMMANDS, "synth", explode)
    assert cli_main(["synth"]) == EXIT_FAILURE

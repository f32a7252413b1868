from pathlib import Path

import pytest

from app.core.exceptions import DataFormatError
from app.core.records import RecordWriter, dump_record, read_records
from app.models.ranking import Ranking


def test_dump_record_is_compact_and_sorted() -> None:
    assert dump_record({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_writer_replaces_and_appends(tmp_path: Path) -> None:
    writer = RecordWriter(tmp_path / "out")
    writer.write("rankings", [Ranking(ids=["a", "b"]), Ranking(ids=["b", "a"])])
    writer.append("decisions", {"window": 0})
    writer.append("decisions", {"window": 1})

    rankings = read_records(tmp_path / "out" / "rankings.jsonl")
    assert [r["ids"] for r in rankings] == [["a", "b"], ["b", "a"]]
    decisions = read_records(tmp_path / "out" / "decisions.jsonl")
    assert [d["window"] for d in decisions] == [0, 1]


def test_first_append_truncates_an_old_stream(tmp_path: Path) -> None:
    (tmp_path / "decisions.jsonl").write_text('{"window":9}\n', encoding="utf-8")
    writer = RecordWriter(tmp_path)
    writer.append("decisions", {"window": 0})
    assert read_records(tmp_path / "decisions.jsonl") == [{"window": 0}]


def test_in_memory_writer_keeps_lines() -> None:
    writer = RecordWriter()
    assert writer.write("report", [{"x": 1}]) is None
    assert writer.lines["report"] == ['{"x":1}']


def test_read_records_reports_the_bad_line(tmp_path: Path) -> None:
    path = tmp_path / "rankings.jsonl"
    path.write_text('{"ids": ["a"]}\n\nnot json\n', encoding="utf-8")
    with pytest.raises(DataFormatError) as exc_info:
        read_records(path)
    assert exc_info.value.status_code == 400
    assert "line 3" in exc_info.value.detail

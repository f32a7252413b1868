import json
import logging
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from app.core.exceptions import DataFormatError

logger = logging.getLogger(__name__)

Record = BaseModel | Mapping[str, Any]


def dump_record(record: Record) -> str:
    payload = record.model_dump(mode="json") if isinstance(record, BaseModel) else dict(record)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


class RecordWriter:
    """Line-delimited JSON streams, one file per stream name under ``directory``.

    A writer without a directory only keeps the lines in memory, which is what
    the services use when no output location was requested.
    """

    def __init__(self, directory: Path | None = None) -> None:
        self.directory = directory
        self.lines: dict[str, list[str]] = {}
        if directory is not None:
            directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, stream: str) -> Path | None:
        if self.directory is None:
            return None
        return self.directory / f"{stream}.jsonl"

    def write(self, stream: str, records: Iterable[Record]) -> Path | None:
        """Replace the stream with ``records``."""
        lines = [dump_record(r) for r in records]
        self.lines[stream] = lines
        path = self.path_for(stream)
        if path is not None:
            path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
            logger.info("Wrote %d records to %s", len(lines), path)
        return path

    def append(self, stream: str, record: Record) -> None:
        line = dump_record(record)
        mode = "a" if stream in self.lines else "w"
        self.lines.setdefault(stream, []).append(line)
        path = self.path_for(stream)
        if path is not None:
            with path.open(mode, encoding="utf-8") as fh:
                fh.write(f"{line}\n")


def read_records(path: Path) -> list[dict[str, Any]]:
    """Parse a JSONL stream; line numbers in errors count from 1, blank lines included."""
    records: list[dict[str, Any]] = []
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: not UTF-8 text ({exc.reason} at byte {exc.start})")
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            parsed = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: line {number} is not valid JSON ({exc.msg})", row=number)
        if isinstance(parsed, dict):
            records.append(parsed)
        else:
            records.append({"value": parsed})
    return records

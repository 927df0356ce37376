"""JSONL reading and writing helpers."""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Tuple, Type, Union

from ..core.exceptions import JsonlParseError

PathLike = Union[str, Path]


def read_jsonl(
    path: PathLike, error_cls: Type[JsonlParseError] = JsonlParseError
) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Yield ``(line_number, record)`` for each non-blank line.

    Line numbers are 1-based. Lines that are not JSON objects raise
    ``error_cls`` naming the file and line.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise error_cls(path, line_number, f"invalid JSON ({e.msg})") from e
            if not isinstance(record, dict):
                raise error_cls(path, line_number, "expected a JSON object")
            yield line_number, record


def dumps_line(record: Dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n"


def write_jsonl(path: PathLike, records: Iterable[Dict[str, Any]]) -> None:
    """Write records atomically (temp file then rename)."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(dumps_line(record))
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def append_jsonl(path: PathLike, record: Dict[str, Any]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_line(record))
        fh.flush()

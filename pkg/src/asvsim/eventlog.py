"""Append-only session event log.

One JSON object per line, written in canonical key order with repr-exact
floats, so identical runs produce byte-identical logs. A truncated file
replays up to its last complete line.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator


def dumps(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"))


class EventLogWriter:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = open(self.path, "w")

    def append(self, record: dict) -> None:
        self._fh.write(dumps(record))
        self._fh.write("\n")

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self) -> "EventLogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_events(path: str | Path) -> Iterator[dict]:
    """Yield complete records; a truncated final line is dropped with a
    warning record count preserved in the exception-free way callers expect."""
    with open(path) as fh:
        for line in fh:
            if not line.endswith("\n"):
                break  # truncated tail
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                break


def collect(records: Iterable[dict]) -> list[dict]:
    return list(records)

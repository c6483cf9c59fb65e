"""Append-only record store with snapshot compaction.

One writer appends JSON records to a line-delimited file; readers get the
in-memory list. ``compact`` folds everything written so far into a single
snapshot state so the file does not grow without bound; reopening the file
restores the snapshot plus any records appended after it.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Mapping, Optional

_SNAPSHOT_KIND = "__snapshot__"


class AppendOnlyStore:
    """Durable (optional) append-only JSONL log with snapshots."""

    def __init__(self, path: Optional[Path] = None) -> None:
        self._path = Path(path) if path is not None else None
        self._records: list[dict] = []
        self._snapshot: Optional[dict] = None
        self._seq = 0
        if self._path is not None and self._path.exists():
            self._load()

    def _load(self) -> None:
        with self._path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record.get("kind") == _SNAPSHOT_KIND:
                    self._snapshot = record["state"]
                    self._records = []
                    self._seq = record["through_seq"]
                else:
                    self._records.append(record)
                    self._seq = max(self._seq, record.get("seq", 0))

    def _write_line(self, record: Mapping, mode: str = "a") -> None:
        if self._path is None:
            return
        self._path.parent.mkdir(parents=True, exist_ok=True)
        with self._path.open(mode, encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def append(self, record: Mapping) -> int:
        """Append one record; returns its monotonically increasing seq."""
        self._seq += 1
        stored = {"seq": self._seq, **record}
        self._records.append(stored)
        self._write_line(stored)
        return self._seq

    @property
    def records(self) -> list[dict]:
        """Records appended since the last snapshot, oldest first."""
        return list(self._records)

    @property
    def snapshot_state(self) -> Optional[dict]:
        return self._snapshot

    @property
    def last_seq(self) -> int:
        return self._seq

    def compact(self, state: Mapping) -> None:
        """Replace the log tail with one snapshot of the caller's state."""
        self._snapshot = dict(state)
        self._records = []
        self._write_line(
            {"kind": _SNAPSHOT_KIND, "state": self._snapshot, "through_seq": self._seq},
            mode="w",
        )

"""File-backed persistence primitives.

Append-only JSONL logs are flushed and fsynced per record, so a state
change acknowledged to a client is already durable. Snapshots go through
the usual write-temp-then-rename dance for atomicity.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from ..canonical import canonical_json


class PersistentLog:
    """Append-only newline-delimited JSON with per-append fsync."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._handle = open(self.path, "a", encoding="utf-8")

    def append(self, record: dict):
        line = canonical_json(record) + "\n"
        with self._lock:
            self._handle.write(line)
            self._handle.flush()
            os.fsync(self._handle.fileno())

    def read_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        with open(self.path, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    def close(self):
        with self._lock:
            self._handle.close()


def atomic_write_json(path: str | Path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(canonical_json(payload))
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def read_json(path: str | Path) -> dict | None:
    path = Path(path)
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))

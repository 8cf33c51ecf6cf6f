"""Embedded storage for telemetry and documents.

Two roles in one directory tree:

* append-only time series, one JSONL segment per channel under
  ``<data_dir>/channels/<channel_id>/readings.jsonl``
* a document store, one JSON file per document under
  ``<data_dir>/docs/<collection>/<key>.json``

Appends are fsynced before the call returns ("strict" durability) or
flushed by a background thread every second ("lazy", for load tests).
Documents are always written via temp-file + atomic rename + fsync.
On open, a torn trailing record (crash mid-write) is truncated away so
readers only ever see fully flushed rows.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .model import METRICS, Reading

COLLECTIONS = ("users", "plants", "channels", "sessions", "alerts")

LAZY_FLUSH_INTERVAL_S = 1.0
SEGMENT_NAME = "readings.jsonl"


class StoreError(Exception):
    pass


class OrderingError(StoreError):
    """Raised when an append would move a channel's timestamp backwards."""


@dataclass(frozen=True)
class MetricStat:
    mean: float
    min: float
    max: float
    count: int


@dataclass(frozen=True)
class AggregatePoint:
    window_start: int
    window_len_s: int
    stats: dict  # metric name -> MetricStat


def _fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class _ChannelLog:
    """One channel's in-memory readings plus its append-only segment file."""

    def __init__(self, channel_id: str, directory: Path):
        self.channel_id = channel_id
        self.directory = directory
        self.path = directory / SEGMENT_NAME
        self.lock = threading.RLock()
        self.readings: list[Reading] = []
        self.dirty = False
        self._fh = None
        self._load()

    def _load(self) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            good_end = 0
            with open(self.path, "rb") as fh:
                for line in fh:
                    if not line.endswith(b"\n"):
                        break  # torn final record
                    try:
                        row = json.loads(line)
                    except ValueError:
                        break
                    self.readings.append(Reading.from_row(self.channel_id, row))
                    good_end += len(line)
            if good_end < self.path.stat().st_size:
                with open(self.path, "rb+") as fh:
                    fh.truncate(good_end)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, reading: Reading, strict: bool) -> Reading:
        with self.lock:
            last = self.readings[-1] if self.readings else None
            if last is not None and reading.ts < last.ts:
                raise OrderingError(
                    f"ts {reading.ts} precedes channel latest {last.ts}"
                )
            seq = (last.seq if last else 0) + 1
            stored = Reading(
                channel_id=self.channel_id,
                ts=reading.ts,
                moisture_pct=reading.moisture_pct,
                temp_c=reading.temp_c,
                humidity_pct=reading.humidity_pct,
                seq=seq,
            )
            self._fh.write(json.dumps(stored.row()) + "\n")
            if strict:
                self._fh.flush()
                os.fsync(self._fh.fileno())
            else:
                self.dirty = True
            self.readings.append(stored)
            return stored

    def flush(self) -> None:
        with self.lock:
            if self.dirty:
                self._fh.flush()
                os.fsync(self._fh.fileno())
                self.dirty = False

    def rewrite(self, readings: list[Reading]) -> None:
        """Atomically replace the segment with the given rows (used by prune)."""
        with self.lock:
            tmp = self.path.with_suffix(".jsonl.tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                for r in readings:
                    fh.write(json.dumps(r.row()) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._fh.close()
            os.replace(tmp, self.path)
            _fsync_dir(self.directory)
            self._fh = open(self.path, "a", encoding="utf-8")
            self.readings = list(readings)
            self.dirty = False

    def close(self) -> None:
        with self.lock:
            if self._fh and not self._fh.closed:
                self._fh.flush()
                os.fsync(self._fh.fileno())
                self._fh.close()


class TelemetryStore:
    def __init__(self, data_dir, durability: str = "strict", retention_days: int = 30):
        if durability not in ("strict", "lazy"):
            raise ValueError(f"unknown durability mode: {durability!r}")
        self.data_dir = Path(data_dir)
        self.durability = durability
        self.retention_days = retention_days
        self._channels_dir = self.data_dir / "channels"
        self._docs_dir = self.data_dir / "docs"
        self._channels_dir.mkdir(parents=True, exist_ok=True)
        for collection in COLLECTIONS:
            (self._docs_dir / collection).mkdir(parents=True, exist_ok=True)
        self._logs: dict[str, _ChannelLog] = {}
        self._logs_lock = threading.Lock()
        self._doc_locks: dict[tuple, threading.Lock] = {}
        self._doc_locks_lock = threading.Lock()
        self._closed = False
        self._stop = threading.Event()
        self._flusher = None
        for entry in sorted(self._channels_dir.iterdir()):
            if entry.is_dir():
                self._logs[entry.name] = _ChannelLog(entry.name, entry)
        if durability == "lazy":
            self._flusher = threading.Thread(
                target=self._flush_loop, name="store-flusher", daemon=True
            )
            self._flusher.start()

    # -- time series ------------------------------------------------------

    def append(self, channel_id: str, reading: Reading) -> int:
        """Append one reading; returns the assigned per-channel seq."""
        log = self._log(channel_id, create=True)
        return log.append(reading, strict=self.durability == "strict").seq

    def latest(self, channel_id: str) -> Optional[Reading]:
        log = self._log(channel_id)
        if log is None:
            return None
        with log.lock:
            return log.readings[-1] if log.readings else None

    def range(self, channel_id: str, t0: int, t1: int) -> list[Reading]:
        """Readings with t0 <= ts <= t1, ascending by seq."""
        if t0 > t1:
            raise ValueError("t0 must be <= t1")
        log = self._log(channel_id)
        if log is None:
            return []
        with log.lock:
            return [r for r in log.readings if t0 <= r.ts <= t1]

    def readings(self, channel_id: str) -> list[Reading]:
        log = self._log(channel_id)
        if log is None:
            return []
        with log.lock:
            return list(log.readings)

    def aggregate(
        self, channel_id: str, t0: int, t1: int, window_len_s: int
    ) -> list[AggregatePoint]:
        """Windowed stats over raw readings; empty windows are omitted.

        Window k covers [t0 + k*w, t0 + (k+1)*w).
        """
        if window_len_s < 1:
            raise ValueError("window_len_s must be >= 1")
        rows = self.range(channel_id, t0, t1)
        buckets: dict[int, list[Reading]] = {}
        for r in rows:
            buckets.setdefault((r.ts - t0) // window_len_s, []).append(r)
        points = []
        for k in sorted(buckets):
            group = buckets[k]
            stats = {}
            for metric in METRICS:
                values = [r.metric(metric) for r in group]
                stats[metric] = MetricStat(
                    mean=sum(values) / len(values),
                    min=min(values),
                    max=max(values),
                    count=len(values),
                )
            points.append(
                AggregatePoint(
                    window_start=t0 + k * window_len_s,
                    window_len_s=window_len_s,
                    stats=stats,
                )
            )
        return points

    def prune(self, retention_days: Optional[int] = None, now: Optional[float] = None) -> int:
        """Drop readings older than the retention window.

        The newest reading of each channel survives regardless of age so
        mood evaluation keeps its staleness anchor. Returns removed count.
        """
        days = self.retention_days if retention_days is None else retention_days
        if days < 1:
            raise ValueError("retention_days must be >= 1")
        cutoff = (time.time() if now is None else now) - days * 86400
        removed = 0
        for channel_id in self.channel_ids():
            log = self._log(channel_id)
            with log.lock:
                if not log.readings:
                    continue
                head, latest = log.readings[:-1], log.readings[-1]
                kept = [r for r in head if r.ts >= cutoff] + [latest]
                if len(kept) != len(log.readings):
                    removed += len(log.readings) - len(kept)
                    log.rewrite(kept)
        return removed

    def drop_channel(self, channel_id: str) -> None:
        with self._logs_lock:
            log = self._logs.pop(channel_id, None)
        if log is not None:
            log.close()
            if log.path.exists():
                os.remove(log.path)
            if log.directory.exists():
                os.rmdir(log.directory)

    def channel_ids(self) -> list[str]:
        with self._logs_lock:
            return sorted(self._logs)

    # -- documents --------------------------------------------------------

    def put_doc(self, collection: str, key: str, document: dict) -> None:
        """Write a document durably; last writer wins per key."""
        path = self._doc_path(collection, key)
        with self._doc_lock(collection, key):
            tmp = path.with_name(path.name + ".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(document, fh)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
            _fsync_dir(path.parent)

    def get_doc(self, collection: str, key: str) -> Optional[dict]:
        path = self._doc_path(collection, key)
        if not path.exists():
            return None
        with self._doc_lock(collection, key):
            return json.loads(path.read_text(encoding="utf-8"))

    def delete_doc(self, collection: str, key: str) -> bool:
        path = self._doc_path(collection, key)
        with self._doc_lock(collection, key):
            if not path.exists():
                return False
            os.remove(path)
            return True

    def list_docs(self, collection: str, where: Optional[dict] = None) -> list[dict]:
        directory = self._collection_dir(collection)
        docs = []
        for path in sorted(directory.glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            if where and any(doc.get(k) != v for k, v in where.items()):
                continue
            docs.append(doc)
        return docs

    # -- lifecycle ---------------------------------------------------------

    def flush(self) -> None:
        for channel_id in self.channel_ids():
            self._log(channel_id).flush()

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._stop.set()
        if self._flusher is not None:
            self._flusher.join(timeout=5)
        with self._logs_lock:
            logs = list(self._logs.values())
        for log in logs:
            log.close()

    def _flush_loop(self) -> None:
        while not self._stop.wait(LAZY_FLUSH_INTERVAL_S):
            try:
                self.flush()
            except Exception:
                continue  # keep flushing; a bad handle surfaces on close

    # -- internals ---------------------------------------------------------

    def _log(self, channel_id: str, create: bool = False) -> Optional[_ChannelLog]:
        with self._logs_lock:
            log = self._logs.get(channel_id)
            if log is None and create:
                log = _ChannelLog(channel_id, self._channels_dir / channel_id)
                self._logs[channel_id] = log
            return log

    def _collection_dir(self, collection: str) -> Path:
        if collection not in COLLECTIONS:
            raise ValueError(f"unknown collection: {collection!r}")
        return self._docs_dir / collection

    def _doc_path(self, collection: str, key: str) -> Path:
        if not key or "/" in key or key.startswith("."):
            raise ValueError(f"bad document key: {key!r}")
        return self._collection_dir(collection) / f"{key}.json"

    def _doc_lock(self, collection: str, key: str) -> threading.Lock:
        with self._doc_locks_lock:
            return self._doc_locks.setdefault((collection, key), threading.Lock())

"""Update handling for the device-facing wire endpoint: write-key auth,
token-bucket rate limiting, raw-value normalization, carry-forward of
missing fields, and validated appends."""

from __future__ import annotations

import threading
import time
from datetime import datetime, timezone
from typing import Mapping, Optional

from .model import FIELD_MAP, Reading, validate_reading
from .registry import Registry
from .store import TelemetryStore

DEFAULT_BUCKET_CAPACITY = 4
DEFAULT_REFILL_SECONDS = 15.0


class IngestError(Exception):
    status = 400


class UnknownKeyError(IngestError):
    status = 401


class RateLimitedError(IngestError):
    status = 429


class BadUpdateError(IngestError):
    status = 400


def normalize_raw(raw: float, raw_min: int, raw_max: int) -> float:
    """Affine map of a raw ADC value onto 0-100, clamped at both ends."""
    if raw_min >= raw_max:
        raise ValueError("raw_min must be less than raw_max")
    pct = 100.0 * (raw - raw_min) / (raw_max - raw_min)
    return min(100.0, max(0.0, pct))


class TokenBucket:
    """Per-key token bucket: `capacity` burst, one token back per
    `refill_seconds`."""

    def __init__(
        self,
        capacity: int = DEFAULT_BUCKET_CAPACITY,
        refill_seconds: float = DEFAULT_REFILL_SECONDS,
    ):
        self.capacity = capacity
        self.refill_seconds = refill_seconds
        self._lock = threading.Lock()
        self._buckets: dict[str, tuple] = {}  # key -> (tokens, last_ts)

    def allow(self, key: str, now: Optional[float] = None) -> bool:
        now = time.time() if now is None else now
        with self._lock:
            tokens, last = self._buckets.get(key, (float(self.capacity), now))
            elapsed = max(0.0, now - last)  # a clock step backwards never drains
            tokens = min(float(self.capacity), tokens + elapsed / self.refill_seconds)
            last = max(now, last)
            if tokens >= 1.0:
                self._buckets[key] = (tokens - 1.0, last)
                return True
            self._buckets[key] = (tokens, last)
            return False


def parse_created_at(value: str) -> int:
    """ISO-8601 timestamp to Unix seconds; naive times are taken as UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise BadUpdateError(f"created_at is not ISO-8601: {value!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


class IngestService:
    def __init__(
        self,
        store: TelemetryStore,
        registry: Registry,
        bucket: Optional[TokenBucket] = None,
        clock=time.time,
    ):
        self._store = store
        self._registry = registry
        self._bucket = bucket or TokenBucket()
        self._clock = clock
        self._channel_locks: dict[str, threading.Lock] = {}
        self._locks_lock = threading.Lock()

    def handle_update(self, params: Mapping, now: Optional[float] = None) -> int:
        """Authenticate, normalize, fill, validate, and append one update.

        Returns the assigned entry id (the per-channel seq). Missing fields
        are carried forward from the channel's latest stored reading; an
        update that leaves a field with no value at all is rejected.
        """
        now = self._clock() if now is None else now
        api_key = (params.get("api_key") or "").strip()
        if not api_key:
            raise UnknownKeyError("missing api_key")
        channel = self._registry.channel_by_key(api_key)
        if channel is None:
            raise UnknownKeyError("unknown api_key")
        if not self._bucket.allow(api_key, now):
            raise RateLimitedError("update rate exceeded for this key")

        present = {}
        for field_name, metric in FIELD_MAP.items():
            raw = params.get(field_name)
            if raw is None or str(raw).strip() == "":
                continue
            try:
                value = float(str(raw).strip())
            except ValueError:
                raise BadUpdateError(f"{field_name} is not a number: {raw!r}") from None
            cal = channel.calibration.get(field_name)
            if cal is not None:
                value = normalize_raw(value, cal.raw_min, cal.raw_max)
            present[metric] = value
        if not present:
            raise BadUpdateError("at least one of field1..field3 is required")

        created_at = params.get("created_at")
        client_ts = parse_created_at(created_at) if created_at else None

        with self._channel_lock(channel.channel_id):
            latest = self._store.latest(channel.channel_id)
            values = {}
            for metric in FIELD_MAP.values():
                if metric in present:
                    values[metric] = present[metric]
                elif latest is not None:
                    values[metric] = latest.metric(metric)
                else:
                    raise BadUpdateError(
                        f"{metric} missing and channel has no prior value"
                    )
            if client_ts is not None:
                if latest is not None and client_ts < latest.ts:
                    raise BadUpdateError(
                        f"created_at {client_ts} precedes channel latest {latest.ts}"
                    )
                ts = client_ts
            else:
                # Server clock is authoritative; never step behind the channel.
                ts = int(now)
                if latest is not None and ts < latest.ts:
                    ts = latest.ts
            reading = Reading(channel_id=channel.channel_id, ts=ts, **values)
            violations = validate_reading(reading)
            if violations:
                raise BadUpdateError("; ".join(violations))
            return self._store.append(channel.channel_id, reading)

    def _channel_lock(self, channel_id: str) -> threading.Lock:
        with self._locks_lock:
            return self._channel_locks.setdefault(channel_id, threading.Lock())

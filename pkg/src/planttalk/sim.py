"""Device simulator: deterministic dry/wet/diurnal traces posted to the
wire endpoint at sensor cadence."""

from __future__ import annotations

import argparse
import hashlib
import math
import random
import sys
import time
import urllib.parse
from dataclasses import dataclass

import httpx

SCENARIO_KINDS = ("dry", "wet", "diurnal")

DAY_S = 86400
PEAK_PHASE_OFFSET_S = 9 * 3600  # sine crosses zero at 09:00, peaks at 15:00


@dataclass(frozen=True)
class Scenario:
    kind: str
    seed: int = 0
    interval_s: int = 15
    duration_s: int = 3600
    jitter_pct: float = 2.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind: {self.kind!r}")
        if self.interval_s < 1:
            raise ValueError("interval_s must be >= 1")
        if not 0 <= self.jitter_pct <= 10:
            raise ValueError("jitter_pct must be in 0..10")


@dataclass
class RunSummary:
    sent: int = 0
    accepted: int = 0
    rejected: int = 0


def tick_rng(seed: int, t: int) -> random.Random:
    """Fresh RNG derived from (seed, tick time), so any tick can be
    recomputed on its own."""
    digest = hashlib.sha256(f"{seed}:{t}".encode("ascii")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _base_values(kind: str, t: int) -> tuple:
    if kind == "dry":
        return 2.0, 25.0, 50.0
    if kind == "wet":
        return 55.0, 25.0, 60.0
    phase = 2.0 * math.pi * (t - PEAK_PHASE_OFFSET_S) / DAY_S
    moisture = min(100.0, max(0.0, 55.0 - 20.0 * t / DAY_S))
    return moisture, 24.0 + 4.0 * math.sin(phase), 60.0 - 15.0 * math.sin(phase)


def gen_reading(scenario: Scenario, t: int) -> dict:
    """Wire fields for the tick at `t` seconds since scenario start."""
    if t < 0:
        raise ValueError("t must be >= 0")
    moisture, temp, humidity = _base_values(scenario.kind, t)
    rng = tick_rng(scenario.seed, t)
    jitter = scenario.jitter_pct / 100.0
    moisture *= 1.0 + rng.uniform(-jitter, jitter)
    temp *= 1.0 + rng.uniform(-jitter, jitter)
    humidity *= 1.0 + rng.uniform(-jitter, jitter)
    moisture = min(100.0, max(0.0, moisture))
    temp = min(85.0, max(-40.0, temp))
    humidity = min(100.0, max(0.0, humidity))
    return {
        "field1": f"{moisture:.2f}",
        "field2": f"{temp:.2f}",
        "field3": f"{humidity:.2f}",
    }


def iter_ticks(scenario: Scenario):
    t = 0
    while t < scenario.duration_s:
        yield t
        t += scenario.interval_s


def request_line(api_key: str, fields: dict) -> str:
    query = urllib.parse.urlencode({"api_key": api_key, **fields})
    return f"POST /update {query}"


def run(
    scenario: Scenario,
    target_url: str,
    api_key: str,
    dry_run: bool = False,
    sleep=time.sleep,
    client: httpx.Client = None,
    out=print,
) -> RunSummary:
    """Post one update per interval until the scenario duration elapses.

    A 429 response waits out one interval and retries the same reading once;
    transport errors retry up to three times before the tick is counted as
    rejected. With dry_run the request lines are printed instead of sent.
    """
    summary = RunSummary()
    owns_client = client is None and not dry_run
    if owns_client:
        client = httpx.Client()
    update_url = target_url.rstrip("/") + "/update"
    try:
        ticks = list(iter_ticks(scenario))
        for i, t in enumerate(ticks):
            fields = gen_reading(scenario, t)
            summary.sent += 1
            if dry_run:
                out(request_line(api_key, fields))
            else:
                status = _post(client, update_url, api_key, fields)
                if status == 429:
                    sleep(scenario.interval_s)
                    status = _post(client, update_url, api_key, fields)
                if status == 200:
                    summary.accepted += 1
                else:
                    summary.rejected += 1
            if i + 1 < len(ticks):
                sleep(scenario.interval_s)
    finally:
        if owns_client:
            client.close()
    return summary


def _post(client: httpx.Client, url: str, api_key: str, fields: dict) -> int:
    for attempt in range(3):
        try:
            resp = client.post(url, data={"api_key": api_key, **fields}, timeout=10.0)
            return resp.status_code
        except httpx.HTTPError:
            if attempt == 2:
                return -1
    return -1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="planttalk-sim",
        description="Simulated sensor node posting dry/wet/diurnal traces.",
    )
    parser.add_argument("--target", default="http://127.0.0.1:8000", help="server base URL")
    parser.add_argument("--api-key", required=True, help="channel write API key")
    parser.add_argument("--scenario", choices=SCENARIO_KINDS, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--interval", type=int, default=15, help="seconds between updates")
    parser.add_argument("--duration", type=int, default=3600, help="total seconds to run")
    parser.add_argument("--jitter", type=float, default=2.0, help="jitter percent (0-10)")
    parser.add_argument("--dry-run", action="store_true", help="print request lines, send nothing")
    args = parser.parse_args(argv)

    scenario = Scenario(
        kind=args.scenario,
        seed=args.seed,
        interval_s=args.interval,
        duration_s=args.duration,
        jitter_pct=args.jitter,
    )
    summary = run(scenario, args.target, args.api_key, dry_run=args.dry_run)
    print(f"sent={summary.sent} accepted={summary.accepted} rejected={summary.rejected}")
    return 0 if summary.rejected == 0 else 1


if __name__ == "__main__":
    sys.exit(main())

"""Alert fan-out and the periodic evaluation loop that drives it."""

from __future__ import annotations

import queue
import threading
import time
import uuid
from typing import Optional

from .mood import MoodAlert, MoodEngine, PlantNotFoundError, TransitionTracker
from .registry import Registry
from .store import TelemetryStore

PRUNE_EVERY_S = 6 * 3600


class AlertBus:
    """In-process pub/sub: one queue per subscriber, addressed by user id."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subs: list[tuple] = []  # (user_id, Queue)

    def subscribe(self, user_id: str) -> "queue.Queue":
        q = queue.Queue()
        with self._lock:
            self._subs.append((user_id, q))
        return q

    def unsubscribe(self, q: "queue.Queue") -> None:
        with self._lock:
            self._subs = [(uid, sq) for uid, sq in self._subs if sq is not q]

    def publish(self, user_id: str, alert: MoodAlert) -> None:
        with self._lock:
            targets = [sq for uid, sq in self._subs if uid == user_id]
        for q in targets:
            q.put(alert)


class EvaluationLoop:
    """Re-evaluates every plant's mood on a fixed cadence, emitting
    debounced transition alerts to the store and the bus. Also owns the
    periodic retention prune."""

    def __init__(
        self,
        store: TelemetryStore,
        registry: Registry,
        engine: MoodEngine,
        tracker: TransitionTracker,
        bus: AlertBus,
        interval_s: float = 60.0,
        prune_every_s: float = PRUNE_EVERY_S,
    ):
        self._store = store
        self._registry = registry
        self._engine = engine
        self._tracker = tracker
        self._bus = bus
        self.interval_s = interval_s
        self._prune_every_s = prune_every_s
        self._last_prune = time.time()
        self._stop = threading.Event()
        self._thread = None

    def run_once(self, now: Optional[float] = None) -> list[MoodAlert]:
        """One evaluation sweep over all plants; returns emitted alerts."""
        now = time.time() if now is None else now
        emitted = []
        for plant in self._registry.all_plants():
            try:
                state = self._engine.evaluate_plant(plant.plant_id, now)
            except PlantNotFoundError:
                continue  # deleted between listing and evaluation
            alert = self._tracker.observe(
                plant.plant_id, state.label, now, display_name=plant.nickname
            )
            if alert is not None:
                self._store.put_doc("alerts", uuid.uuid4().hex, alert.to_doc())
                self._bus.publish(plant.owner_user_id, alert)
                emitted.append(alert)
        if now - self._last_prune >= self._prune_every_s:
            self._store.prune(now=now)
            self._last_prune = now
        return emitted

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._loop, name="eval-loop", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def _loop(self) -> None:
        while not self._stop.wait(self.interval_s):
            try:
                self.run_once()
            except Exception:
                continue  # a bad sweep must not kill the loop

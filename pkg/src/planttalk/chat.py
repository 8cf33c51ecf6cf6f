"""Chat pipeline: mood evaluation -> prompt assembly -> completion ->
session persistence."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass
from typing import Optional

from .llm import CompletionRequest
from .model import Plant, SpeciesCatalog
from .mood import MoodEngine, MoodState
from .prompting import (
    DEFAULT_CHAR_BUDGET,
    PLANT_ROLE,
    USER_ROLE,
    assemble,
    build_preamble,
    build_snapshot,
)
from .store import TelemetryStore

MAX_SESSION_TURNS = 200
MAX_MESSAGE_CHARS = 1000


@dataclass(frozen=True)
class ChatReply:
    reply: str
    mood: MoodState
    snapshot_ts: Optional[int]


class ChatService:
    def __init__(
        self,
        store: TelemetryStore,
        catalog: SpeciesCatalog,
        engine: MoodEngine,
        provider,
        char_budget: int = DEFAULT_CHAR_BUDGET,
        max_turns: int = MAX_SESSION_TURNS,
    ):
        self._store = store
        self._catalog = catalog
        self._engine = engine
        self._provider = provider
        self._char_budget = char_budget
        self._max_turns = max_turns
        self._locks: dict[str, threading.Lock] = {}
        self._locks_lock = threading.Lock()

    def post_chat(self, plant: Plant, message: str, now: Optional[float] = None) -> ChatReply:
        """Run the full chat round-trip for one user message.

        Both turns are persisted only after the provider reply arrives, so
        a failed completion leaves the session untouched and the caller can
        simply retry.
        """
        if not 1 <= len(message) <= MAX_MESSAGE_CHARS:
            raise ValueError(f"message must be 1-{MAX_MESSAGE_CHARS} characters")
        now = time.time() if now is None else now
        with self._session_lock(plant.plant_id):
            state = self._engine.evaluate_plant(plant.plant_id, now)
            species = self._catalog.resolve(plant.species_id)
            bundle = assemble(
                preamble=build_preamble(species, plant.nickname),
                snapshot=build_snapshot(state, species),
                history=[(t["role"], t["text"]) for t in self._turns(plant.plant_id)],
                user_message=message,
                char_budget=self._char_budget,
            )
            reply = self._provider.complete(
                CompletionRequest(
                    prompt=bundle.rendered,
                    timeout_s=20.0,
                    idempotency_key=uuid.uuid4().hex,
                )
            )
            ts = int(now)
            turns = self._turns(plant.plant_id)
            turns.append({"role": USER_ROLE, "text": message, "ts": ts})
            turns.append({"role": PLANT_ROLE, "text": reply, "ts": ts})
            self._save(plant.plant_id, turns)
        return ChatReply(reply=reply, mood=state, snapshot_ts=state.as_of)

    def history(self, plant_id: str, limit: int = 50) -> list[dict]:
        """The last `limit` turns, oldest first."""
        if not 1 <= limit <= self._max_turns:
            raise ValueError(f"limit must be 1-{self._max_turns}")
        turns = self._turns(plant_id)
        return turns[-limit:]

    def _turns(self, plant_id: str) -> list[dict]:
        doc = self._store.get_doc("sessions", plant_id)
        return list(doc["turns"]) if doc else []

    def _save(self, plant_id: str, turns: list[dict]) -> None:
        if len(turns) > self._max_turns:
            turns = turns[-self._max_turns:]
        self._store.put_doc("sessions", plant_id, {"plant_id": plant_id, "turns": turns})

    def _session_lock(self, plant_id: str) -> threading.Lock:
        with self._locks_lock:
            return self._locks.setdefault(plant_id, threading.Lock())

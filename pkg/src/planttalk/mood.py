"""Mood derivation: per-metric band scores, label classification, and
debounced mood-transition detection."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .model import METRICS, MOISTURE_PCT, TEMP_C, HUMIDITY_PCT, Plant, Reading, SpeciesProfile


class MoodLabel(str, Enum):
    THRIVING = "Thriving"
    THIRSTY = "Thirsty"
    WATERLOGGED = "Waterlogged"
    COLD = "Cold"
    OVERHEATED = "Overheated"
    DRY_AIR = "DryAir"
    MUGGY_AIR = "MuggyAir"
    UNKNOWN = "Unknown"


LOW_LABEL = {MOISTURE_PCT: MoodLabel.THIRSTY, TEMP_C: MoodLabel.COLD, HUMIDITY_PCT: MoodLabel.DRY_AIR}
HIGH_LABEL = {MOISTURE_PCT: MoodLabel.WATERLOGGED, TEMP_C: MoodLabel.OVERHEATED, HUMIDITY_PCT: MoodLabel.MUGGY_AIR}

DEFAULT_DEFICIT_THRESHOLD = 60.0
DEFAULT_STALE_AFTER_S = 900
DEFAULT_DEBOUNCE = 2


@dataclass(frozen=True)
class MetricFactor:
    value: float
    score: float
    lo: float
    hi: float


@dataclass(frozen=True)
class MoodState:
    label: MoodLabel
    comfort: float
    factors: dict  # metric name -> MetricFactor; empty for Unknown
    as_of: Optional[int]  # ts of the reading used; None for Unknown


UNKNOWN_STATE = MoodState(MoodLabel.UNKNOWN, 0.0, {}, None)


@dataclass(frozen=True)
class MoodAlert:
    plant_id: str
    from_label: MoodLabel
    to_label: MoodLabel
    at: int
    message: str

    def to_doc(self) -> dict:
        return {
            "plant_id": self.plant_id,
            "from_label": self.from_label.value,
            "to_label": self.to_label.value,
            "at": self.at,
            "message": self.message,
        }


def metric_score(value: float, lo: float, hi: float, cutoff: float) -> float:
    """Comfort contribution of one metric: 100 inside [lo, hi], falling
    linearly to 0 at `cutoff` distance outside the band."""
    if lo <= value <= hi:
        return 100.0
    dist = lo - value if value < lo else value - hi
    return 100.0 * max(0.0, 1.0 - dist / cutoff)


def classify(
    reading: Reading,
    species: SpeciesProfile,
    deficit_threshold: float = DEFAULT_DEFICIT_THRESHOLD,
) -> MoodState:
    """Derive a mood from one reading against the species bands.

    All factor scores at or above the deficit threshold means Thriving;
    otherwise the lowest-scoring metric names the mood, ties resolved in
    METRICS order (moisture before temperature before humidity). Comfort
    is the minimum factor score either way.
    """
    factors = {}
    for metric in METRICS:
        band = species.bands[metric]
        value = reading.metric(metric)
        score = metric_score(value, band.lo, band.hi, species.cutoffs[metric])
        factors[metric] = MetricFactor(value=value, score=score, lo=band.lo, hi=band.hi)

    comfort = min(f.score for f in factors.values())
    if all(f.score >= deficit_threshold for f in factors.values()):
        label = MoodLabel.THRIVING
    else:
        worst = min(METRICS, key=lambda m: factors[m].score)
        f = factors[worst]
        if f.value < f.lo:
            label = LOW_LABEL[worst]
        elif f.value > f.hi:
            label = HIGH_LABEL[worst]
        else:
            # Unreachable with thresholds <= 100: an in-band metric scores 100.
            label = MoodLabel.THRIVING
    return MoodState(label=label, comfort=comfort, factors=factors, as_of=reading.ts)


class PlantNotFoundError(KeyError):
    pass


class MoodEngine:
    """Evaluates the current mood of a plant from its latest stored reading."""

    def __init__(
        self,
        store,
        catalog,
        plant_lookup: Callable[[str], Optional[Plant]],
        channel_lookup: Callable[[str], Optional[object]],
        stale_after_s: int = DEFAULT_STALE_AFTER_S,
        deficit_threshold: float = DEFAULT_DEFICIT_THRESHOLD,
    ):
        self._store = store
        self._catalog = catalog
        self._plant_lookup = plant_lookup
        self._channel_lookup = channel_lookup
        self.stale_after_s = stale_after_s
        self.deficit_threshold = deficit_threshold

    def evaluate_plant(self, plant_id: str, now: Optional[float] = None) -> MoodState:
        """Classify the latest reading, or Unknown when there is none or it
        is older than the staleness window."""
        plant = self._plant_lookup(plant_id)
        if plant is None:
            raise PlantNotFoundError(plant_id)
        now = time.time() if now is None else now
        channel = self._channel_lookup(plant_id)
        if channel is None:
            return UNKNOWN_STATE
        latest = self._store.latest(channel.channel_id)
        if latest is None or now - latest.ts > self.stale_after_s:
            return UNKNOWN_STATE
        species = self._catalog.resolve(plant.species_id)
        return classify(latest, species, self.deficit_threshold)


class TransitionTracker:
    """Debounced mood-transition detection, one slot per plant.

    A new label must be seen on `debounce` consecutive evaluations before
    it replaces the committed label and yields an alert; the first label a
    plant ever shows is committed silently (there is nothing to transition
    from). Observations that return to the committed label clear any
    pending candidate.
    """

    def __init__(self, debounce: int = DEFAULT_DEBOUNCE):
        if debounce < 1:
            raise ValueError("debounce must be >= 1")
        self.debounce = debounce
        self._lock = threading.Lock()
        self._committed: dict[str, MoodLabel] = {}
        self._candidate: dict[str, tuple] = {}  # plant_id -> (label, count)

    def observe(
        self,
        plant_id: str,
        label: MoodLabel,
        now: Optional[float] = None,
        display_name: Optional[str] = None,
    ) -> Optional[MoodAlert]:
        now = time.time() if now is None else now
        with self._lock:
            committed = self._committed.get(plant_id)
            if committed is None:
                self._committed[plant_id] = label
                return None
            if label == committed:
                self._candidate.pop(plant_id, None)
                return None
            cand_label, count = self._candidate.get(plant_id, (None, 0))
            count = count + 1 if cand_label == label else 1
            if count < self.debounce:
                self._candidate[plant_id] = (label, count)
                return None
            self._candidate.pop(plant_id, None)
            self._committed[plant_id] = label
            name = display_name or plant_id
            return MoodAlert(
                plant_id=plant_id,
                from_label=committed,
                to_label=label,
                at=int(now),
                message=f"{name} now feels {label.value} (was {committed.value}).",
            )

    def forget(self, plant_id: str) -> None:
        with self._lock:
            self._committed.pop(plant_id, None)
            self._candidate.pop(plant_id, None)

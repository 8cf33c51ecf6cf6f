"""Domain types, reading validation, and the species catalog."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

MOISTURE_PCT = "moisture_pct"
TEMP_C = "temp_c"
HUMIDITY_PCT = "humidity_pct"

# Priority order: watering problems outrank temperature outrank air humidity.
METRICS = (MOISTURE_PCT, TEMP_C, HUMIDITY_PCT)

# Percent metrics are hard 0-100; temperature uses the DHT-class sensor envelope.
READING_BOUNDS = {
    MOISTURE_PCT: (0.0, 100.0),
    TEMP_C: (-40.0, 85.0),
    HUMIDITY_PCT: (0.0, 100.0),
}

# Wire field numbering is fixed; field4 is reserved for a future light metric.
FIELD_MAP = {"field1": MOISTURE_PCT, "field2": TEMP_C, "field3": HUMIDITY_PCT}

NICKNAME_MAX_LEN = 40


@dataclass(frozen=True)
class Reading:
    """One normalized sensor sample. `seq` is assigned by the store."""

    channel_id: str
    ts: int
    moisture_pct: float
    temp_c: float
    humidity_pct: float
    seq: int = 0

    def metric(self, name: str) -> float:
        return getattr(self, name)

    def row(self) -> dict:
        return {
            "seq": self.seq,
            "ts": self.ts,
            "moisture_pct": self.moisture_pct,
            "temp_c": self.temp_c,
            "humidity_pct": self.humidity_pct,
        }

    @classmethod
    def from_row(cls, channel_id: str, row: dict) -> "Reading":
        return cls(
            channel_id=channel_id,
            ts=int(row["ts"]),
            moisture_pct=float(row["moisture_pct"]),
            temp_c=float(row["temp_c"]),
            humidity_pct=float(row["humidity_pct"]),
            seq=int(row["seq"]),
        )


def validate_reading(reading: Reading) -> list[str]:
    """Check a candidate reading against the sensor envelope.

    Returns an empty list when every value is in range, otherwise one
    violation string per offending field naming the bound it broke.
    """
    violations = []
    for name in METRICS:
        lo, hi = READING_BOUNDS[name]
        value = reading.metric(name)
        if not isinstance(value, (int, float)) or value != value:  # NaN guard
            violations.append(f"{name} is not a number")
        elif value < lo:
            violations.append(f"{name} below minimum {lo:g}")
        elif value > hi:
            violations.append(f"{name} above maximum {hi:g}")
    return violations


@dataclass(frozen=True)
class Calibration:
    """Raw ADC range for one wire field; raw_min maps to 0%, raw_max to 100%."""

    raw_min: int
    raw_max: int

    def __post_init__(self):
        if self.raw_min >= self.raw_max:
            raise ValueError("raw_min must be less than raw_max")


@dataclass(frozen=True)
class SensorChannel:
    channel_id: str
    plant_id: str
    write_api_key: str
    field_map: dict = field(default_factory=lambda: dict(FIELD_MAP))
    calibration: dict = field(default_factory=dict)  # field name -> Calibration

    def to_doc(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "plant_id": self.plant_id,
            "write_api_key": self.write_api_key,
            "field_map": dict(self.field_map),
            "calibration": {
                f: {"raw_min": c.raw_min, "raw_max": c.raw_max}
                for f, c in self.calibration.items()
            },
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SensorChannel":
        return cls(
            channel_id=doc["channel_id"],
            plant_id=doc["plant_id"],
            write_api_key=doc["write_api_key"],
            field_map=dict(doc.get("field_map") or FIELD_MAP),
            calibration={
                f: Calibration(int(c["raw_min"]), int(c["raw_max"]))
                for f, c in (doc.get("calibration") or {}).items()
            },
        )


@dataclass(frozen=True)
class Plant:
    plant_id: str
    owner_user_id: str
    species_id: str
    nickname: str
    created_at: int

    def to_doc(self) -> dict:
        return {
            "plant_id": self.plant_id,
            "owner_user_id": self.owner_user_id,
            "species_id": self.species_id,
            "nickname": self.nickname,
            "created_at": self.created_at,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Plant":
        return cls(
            plant_id=doc["plant_id"],
            owner_user_id=doc["owner_user_id"],
            species_id=doc["species_id"],
            nickname=doc["nickname"],
            created_at=int(doc["created_at"]),
        )


@dataclass(frozen=True)
class User:
    user_id: str
    login_name: str
    token_hash: str

    def to_doc(self) -> dict:
        return {
            "user_id": self.user_id,
            "login_name": self.login_name,
            "token_hash": self.token_hash,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "User":
        return cls(doc["user_id"], doc["login_name"], doc["token_hash"])


@dataclass(frozen=True)
class Band:
    lo: float
    hi: float


@dataclass(frozen=True)
class SpeciesProfile:
    """Ideal environmental bands plus the persona fragment for one species."""

    species_id: str
    display_name: str
    persona: str
    bands: dict  # metric name -> Band
    cutoffs: dict  # metric name -> float, distance outside the band scoring 0


class UnknownSpeciesError(KeyError):
    pass


# Seed catalog. These bands and cutoffs are pragmatic hobby-sensor defaults,
# not botanical ground truth; override with a catalog file when it matters.
DEFAULT_SPECIES = {
    "cactus": {
        "display_name": "Cactus",
        "persona": "a cactus",
        "bands": {
            "moisture_pct": {"lo": 10, "hi": 30},
            "temp_c": {"lo": 18, "hi": 35},
            "humidity_pct": {"lo": 10, "hi": 60},
        },
        # Tight moisture cutoff: a cactus 8 points below its already low
        # floor is bone dry and should read as fully uncomfortable.
        "cutoffs": {"moisture_pct": 8, "temp_c": 10, "humidity_pct": 25},
    },
    "pothos": {
        "display_name": "Pothos",
        "persona": "a pothos plant",
        "bands": {
            "moisture_pct": {"lo": 40, "hi": 60},
            "temp_c": {"lo": 18, "hi": 28},
            "humidity_pct": {"lo": 40, "hi": 70},
        },
        "cutoffs": {"moisture_pct": 20, "temp_c": 10, "humidity_pct": 25},
    },
    "fern": {
        "display_name": "Boston fern",
        "persona": "a fern",
        "bands": {
            "moisture_pct": {"lo": 45, "hi": 70},
            "temp_c": {"lo": 16, "hi": 24},
            "humidity_pct": {"lo": 50, "hi": 80},
        },
        "cutoffs": {"moisture_pct": 20, "temp_c": 10, "humidity_pct": 25},
    },
    "snake_plant": {
        "display_name": "Snake plant",
        "persona": "a snake plant",
        "bands": {
            "moisture_pct": {"lo": 15, "hi": 40},
            "temp_c": {"lo": 18, "hi": 30},
            "humidity_pct": {"lo": 30, "hi": 60},
        },
        "cutoffs": {"moisture_pct": 20, "temp_c": 10, "humidity_pct": 25},
    },
}


def _parse_profile(species_id: str, raw: dict) -> SpeciesProfile:
    display_name = str(raw.get("display_name") or species_id)
    persona = raw.get("persona")
    if not persona or not str(persona).strip():
        raise ValueError(f"species {species_id!r}: persona must be non-empty")
    bands = {}
    cutoffs = {}
    for metric in METRICS:
        try:
            band_raw = raw["bands"][metric]
            cutoff = float(raw["cutoffs"][metric])
        except KeyError as exc:
            raise ValueError(f"species {species_id!r}: missing {exc} entry") from None
        lo, hi = float(band_raw["lo"]), float(band_raw["hi"])
        if lo >= hi:
            raise ValueError(f"species {species_id!r}: {metric} band lo must be < hi")
        if cutoff <= 0:
            raise ValueError(f"species {species_id!r}: {metric} cutoff must be > 0")
        bands[metric] = Band(lo, hi)
        cutoffs[metric] = cutoff
    return SpeciesProfile(species_id, display_name, str(persona), bands, cutoffs)


class SpeciesCatalog:
    """Read-only species lookup, loaded once at startup."""

    def __init__(self, profiles: dict):
        self._profiles = dict(profiles)

    @classmethod
    def default(cls) -> "SpeciesCatalog":
        return cls({sid: _parse_profile(sid, raw) for sid, raw in DEFAULT_SPECIES.items()})

    @classmethod
    def from_file(cls, path) -> "SpeciesCatalog":
        """Load a catalog JSON file: an object keyed by species_id."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict) or not data:
            raise ValueError("species catalog must be a non-empty JSON object")
        return cls({sid: _parse_profile(sid, raw) for sid, raw in data.items()})

    def resolve(self, species_id: str) -> SpeciesProfile:
        """Exact, case-sensitive lookup; raises UnknownSpeciesError when absent."""
        try:
            return self._profiles[species_id]
        except KeyError:
            raise UnknownSpeciesError(species_id) from None

    def get(self, species_id: str) -> Optional[SpeciesProfile]:
        return self._profiles.get(species_id)

    def species_ids(self) -> list[str]:
        return sorted(self._profiles)

    def profiles(self) -> list[SpeciesProfile]:
        return [self._profiles[sid] for sid in self.species_ids()]

import random

import pytest

from planttalk.model import Reading, SpeciesCatalog
from planttalk.mood import (
    MoodLabel,
    PlantNotFoundError,
    TransitionTracker,
    classify,
    metric_score,
)

CATALOG = SpeciesCatalog.default()
POTHOS = CATALOG.resolve("pothos")


def reading(moisture, temp, humidity, ts=1000):
    return Reading("ch", ts, moisture, temp, humidity)


# -- metric_score -----------------------------------------------------------


def test_score_inside_band_is_100():
    assert metric_score(50, 40, 60, 20) == 100.0
    assert metric_score(40, 40, 60, 20) == 100.0  # closed edges
    assert metric_score(60, 40, 60, 20) == 100.0


def test_score_linear_falloff():
    assert metric_score(30, 40, 60, 20) == 50.0  # 100 * (1 - 10/20)
    assert metric_score(70, 40, 60, 20) == 50.0
    assert metric_score(20, 40, 60, 20) == 0.0  # dist == cutoff
    assert metric_score(0, 40, 60, 20) == 0.0  # beyond cutoff stays 0


def test_score_monotone_and_continuous():
    rng = random.Random(2)
    for _ in range(200):
        lo, span = rng.uniform(0, 50), rng.uniform(1, 40)
        hi, cutoff = lo + span, rng.uniform(0.5, 30)
        a, b = sorted((rng.uniform(lo - 60, lo), rng.uniform(lo - 60, lo)))
        # below the band, score is non-decreasing as value approaches lo
        assert metric_score(a, lo, hi, cutoff) <= metric_score(b, lo, hi, cutoff) + 1e-12
        # continuity at the band edge
        eps = 1e-9
        assert abs(metric_score(lo - eps, lo, hi, cutoff) - 100.0) < 1e-5
        assert abs(metric_score(hi + eps, lo, hi, cutoff) - 100.0) < 1e-5


# -- classify ----------------------------------------------------------------


def test_classify_bone_dry_pothos_is_thirsty():
    state = classify(reading(0, 25, 50), POTHOS)
    assert state.label is MoodLabel.THIRSTY
    assert state.comfort == 0.0
    assert state.as_of == 1000


def test_classify_midband_pothos_is_thriving():
    state = classify(reading(50, 23, 55), POTHOS)
    assert state.label is MoodLabel.THRIVING
    assert state.comfort == 100.0


def test_classify_direction_labels():
    assert classify(reading(95, 23, 55), POTHOS).label is MoodLabel.WATERLOGGED
    assert classify(reading(50, -10, 55), POTHOS).label is MoodLabel.COLD
    assert classify(reading(50, 45, 55), POTHOS).label is MoodLabel.OVERHEATED
    assert classify(reading(50, 23, 2), POTHOS).label is MoodLabel.DRY_AIR
    assert classify(reading(50, 23, 100), POTHOS).label is MoodLabel.MUGGY_AIR


def test_classify_tie_prefers_moisture_then_temp():
    # moisture and humidity equally far below their cutoffs -> moisture wins
    state = classify(reading(0, 23, 0), POTHOS)
    assert state.factors["moisture_pct"].score == state.factors["humidity_pct"].score == 0.0
    assert state.label is MoodLabel.THIRSTY
    # temp and humidity both at zero -> temp wins
    state = classify(reading(50, -50, 0), POTHOS)
    assert state.label is MoodLabel.COLD


def test_classify_never_unknown_and_comfort_is_min():
    rng = random.Random(4)
    for _ in range(300):
        r = reading(rng.uniform(0, 100), rng.uniform(-40, 85), rng.uniform(0, 100))
        state = classify(r, POTHOS)
        assert state.label is not MoodLabel.UNKNOWN
        assert state.comfort == min(f.score for f in state.factors.values())


def test_label_depends_only_on_scores_and_directions():
    # Same ordered (score, direction) tuple built from different bands and
    # values must produce the same label.
    a = classify(reading(30, 23, 55), POTHOS)  # moisture 10 below band, cutoff 20
    cactus = CATALOG.resolve("cactus")
    b = classify(reading(6, 25, 30), cactus)  # moisture 4 below band, cutoff 8
    assert a.factors["moisture_pct"].score == b.factors["moisture_pct"].score == 50.0
    assert a.label is b.label is MoodLabel.THIRSTY


# -- evaluate_plant ------------------------------------------------------------


@pytest.fixture
def engine_env(ctx):
    user, _ = ctx.registry.create_user("mia")
    plant = ctx.registry.create_plant(user.user_id, "pothos", "Ivy")
    channel = ctx.registry.create_channel(plant.plant_id)
    return ctx, plant, channel


def test_evaluate_fresh_stale_missing(engine_env):
    ctx, plant, channel = engine_env
    now = 100_000

    state = ctx.engine.evaluate_plant(plant.plant_id, now)
    assert state.label is MoodLabel.UNKNOWN  # no readings ever
    assert state.as_of is None

    ctx.store.append(channel.channel_id, Reading(channel.channel_id, now - 10, 50, 23, 55))
    assert ctx.engine.evaluate_plant(plant.plant_id, now).label is MoodLabel.THRIVING

    late = now + 1000  # reading now 1010 s old
    assert ctx.engine.evaluate_plant(plant.plant_id, late).label is MoodLabel.UNKNOWN


def test_evaluate_staleness_boundary(engine_env):
    ctx, plant, channel = engine_env
    now = 200_000
    ctx.store.append(channel.channel_id, Reading(channel.channel_id, now - 899, 50, 23, 55))
    assert ctx.engine.evaluate_plant(plant.plant_id, now).label is MoodLabel.THRIVING
    # exactly 900 s old is still fresh; staleness requires age > 900
    ctx.store.append(channel.channel_id, Reading(channel.channel_id, now - 899, 50, 23, 55))
    assert ctx.engine.evaluate_plant(plant.plant_id, now + 1).label is MoodLabel.THRIVING
    assert ctx.engine.evaluate_plant(plant.plant_id, now + 2).label is MoodLabel.UNKNOWN


def test_evaluate_unknown_plant(ctx):
    with pytest.raises(PlantNotFoundError):
        ctx.engine.evaluate_plant("missing", 0)


# -- transition debounce ---------------------------------------------------------


def replay_oracle(labels, debounce=2):
    """Straightforward re-statement of the debounce rule for cross-checking."""
    alerts = []
    committed = None
    cand, count = None, 0
    for label in labels:
        if committed is None:
            committed = label
            continue
        if label == committed:
            cand, count = None, 0
            continue
        count = count + 1 if cand == label else 1
        cand = label
        if count >= debounce:
            alerts.append((committed, label))
            committed, cand, count = label, None, 0
    return alerts


def test_debounce_requires_two_observations():
    tracker = TransitionTracker(debounce=2)
    assert tracker.observe("p", MoodLabel.THRIVING, 0) is None
    assert tracker.observe("p", MoodLabel.THIRSTY, 1) is None  # seen once
    alert = tracker.observe("p", MoodLabel.THIRSTY, 2)  # seen twice
    assert alert is not None
    assert (alert.from_label, alert.to_label) == (MoodLabel.THRIVING, MoodLabel.THIRSTY)
    # steady state emits nothing further
    for i in range(5):
        assert tracker.observe("p", MoodLabel.THIRSTY, 3 + i) is None


def test_debounce_bounce_back_resets_candidate():
    tracker = TransitionTracker(debounce=2)
    tracker.observe("p", MoodLabel.THRIVING, 0)
    assert tracker.observe("p", MoodLabel.THIRSTY, 1) is None
    assert tracker.observe("p", MoodLabel.THRIVING, 2) is None  # back home
    assert tracker.observe("p", MoodLabel.THIRSTY, 3) is None  # count restarts
    assert tracker.observe("p", MoodLabel.THIRSTY, 4) is not None


def test_debounce_matches_replay_oracle_on_random_sequences():
    labels = [MoodLabel.THRIVING, MoodLabel.THIRSTY, MoodLabel.COLD, MoodLabel.UNKNOWN]
    rng = random.Random(13)
    for _ in range(100):
        seq = [rng.choice(labels) for _ in range(rng.randint(1, 40))]
        tracker = TransitionTracker(debounce=2)
        got = []
        for i, label in enumerate(seq):
            alert = tracker.observe("p", label, i)
            if alert:
                got.append((alert.from_label, alert.to_label))
        assert got == replay_oracle(seq)


def test_alert_from_differs_from_to():
    tracker = TransitionTracker(debounce=1)
    tracker.observe("p", MoodLabel.THRIVING, 0)
    alert = tracker.observe("p", MoodLabel.COLD, 1)
    assert alert.from_label != alert.to_label

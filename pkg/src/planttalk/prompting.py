"""Persona prompt assembly: preamble, sensor snapshot, history truncation."""

from __future__ import annotations

from dataclasses import dataclass

from .model import MOISTURE_PCT, TEMP_C, HUMIDITY_PCT, SpeciesProfile
from .mood import MoodLabel, MoodState

USER_ROLE = "user"
PLANT_ROLE = "plant"

DEFAULT_CHAR_BUDGET = 4000

PREAMBLE_TEMPLATE = (
    'Imagine you are {persona} named "{nickname}". Respond in first person '
    "as the plant, in under 60 words, warmly and plainly. Never mention "
    "being an AI."
)

NO_DATA_SNAPSHOT = (
    "You have no recent sensor data; say you cannot feel your roots right now."
)

MOOD_MARKER = "Overall you feel: "

_METRIC_LINES = (
    (MOISTURE_PCT, "soil moisture", "%"),
    (TEMP_C, "temperature", "°C"),
    (HUMIDITY_PCT, "air humidity", "%"),
)


class PromptBudgetError(ValueError):
    """The irreducible prompt parts alone exceed the character budget."""


@dataclass(frozen=True)
class PromptBundle:
    preamble: str
    snapshot: str
    history: tuple  # ((role, text), ...) after truncation
    user_message: str
    char_budget: int
    rendered: str


def _num(x: float) -> str:
    return format(round(float(x), 1), "g")


def build_preamble(species: SpeciesProfile, nickname: str) -> str:
    return PREAMBLE_TEMPLATE.format(persona=species.persona, nickname=nickname)


def build_snapshot(state: MoodState, species: SpeciesProfile) -> str:
    """Render the live sensor context the persona grounds its reply in."""
    if state.label is MoodLabel.UNKNOWN:
        return NO_DATA_SNAPSHOT
    lines = []
    for metric, name, unit in _METRIC_LINES:
        band = species.bands[metric]
        value = state.factors[metric].value
        lines.append(
            f"{name} {_num(value)}{unit} (ideal {_num(band.lo)}–{_num(band.hi)}{unit})"
        )
    lines.append(f"{MOOD_MARKER}{state.label.value}, comfort {_num(state.comfort)}/100.")
    return "\n".join(lines)


def render_turn(role: str, text: str) -> str:
    label = "User" if role == USER_ROLE else "Plant"
    return f"{label}: {text}\n"


def truncate_history(history, budget_remaining: int):
    """Keep the longest suffix of whole turns whose rendering fits the budget."""
    if budget_remaining < 0:
        raise ValueError("budget_remaining must be >= 0")
    kept = []
    used = 0
    for role, text in reversed(list(history)):
        cost = len(render_turn(role, text))
        if used + cost > budget_remaining:
            break
        kept.append((role, text))
        used += cost
    kept.reverse()
    return kept


def assemble(
    preamble: str,
    snapshot: str,
    history,
    user_message: str,
    char_budget: int = DEFAULT_CHAR_BUDGET,
) -> PromptBundle:
    """Compose the full prompt, dropping oldest history turns to fit.

    The preamble, snapshot, and user message are irreducible; if they do
    not fit on their own, raises PromptBudgetError.
    """
    tail = f"User: {user_message}\nPlant:"
    base_len = len(preamble) + 2 + len(snapshot) + 2 + len(tail)
    if base_len > char_budget:
        raise PromptBudgetError(
            f"prompt needs {base_len} chars with empty history, budget is {char_budget}"
        )
    kept = truncate_history(history, char_budget - base_len)
    transcript = "".join(render_turn(role, text) for role, text in kept)
    rendered = f"{preamble}\n\n{snapshot}\n\n{transcript}{tail}"
    return PromptBundle(
        preamble=preamble,
        snapshot=snapshot,
        history=tuple(kept),
        user_message=user_message,
        char_budget=char_budget,
        rendered=rendered,
    )

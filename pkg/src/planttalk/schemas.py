"""Pydantic request/response models for the REST API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from .model import NICKNAME_MAX_LEN
from .chat import MAX_MESSAGE_CHARS


class ErrorBody(BaseModel):
    code: str
    message: str


class RegisterRequest(BaseModel):
    login_name: str = Field(min_length=1, max_length=64)


class RegisterResponse(BaseModel):
    user_id: str
    login_name: str
    token: str


class WhoamiResponse(BaseModel):
    user_id: str
    login_name: str


class SpeciesOut(BaseModel):
    species_id: str
    display_name: str
    persona: str


class PlantCreateRequest(BaseModel):
    species_id: str
    nickname: str = Field(min_length=1, max_length=NICKNAME_MAX_LEN)


class PlantOut(BaseModel):
    plant_id: str
    species_id: str
    nickname: str
    created_at: int


class CalibrationIn(BaseModel):
    raw_min: int
    raw_max: int


class ChannelCreateRequest(BaseModel):
    calibration: Optional[dict[str, CalibrationIn]] = None


class ChannelOut(BaseModel):
    channel_id: str
    write_api_key: str
    field_map: dict[str, str]


class MetricFactorOut(BaseModel):
    value: float
    score: float
    lo: float
    hi: float


class MoodOut(BaseModel):
    label: str
    comfort: float
    factors: dict[str, MetricFactorOut]
    as_of: Optional[int]


class ReadingOut(BaseModel):
    ts: int
    moisture_pct: float
    temp_c: float
    humidity_pct: float
    seq: int


class MetricStatOut(BaseModel):
    mean: float
    min: float
    max: float
    count: int


class AggregateOut(BaseModel):
    window_start: int
    window_len_s: int
    stats: dict[str, MetricStatOut]


class DashboardResponse(BaseModel):
    plant_id: str
    latest: Optional[ReadingOut]
    mood: MoodOut
    aggregates: list[AggregateOut]


class ChatRequest(BaseModel):
    message: str = Field(min_length=1, max_length=MAX_MESSAGE_CHARS)


class ChatResponse(BaseModel):
    reply: str
    mood: MoodOut
    snapshot_ts: Optional[int]


class TurnOut(BaseModel):
    role: str
    text: str
    ts: int


class HistoryResponse(BaseModel):
    plant_id: str
    turns: list[TurnOut]

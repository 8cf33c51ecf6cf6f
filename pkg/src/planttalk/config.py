"""Server configuration: TOML file plus CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass
class LLMConfig:
    kind: str = "mock"  # mock | remote
    endpoint_url: str = ""
    api_key_env_name: str = "PLANTTALK_LLM_API_KEY"
    model_name: str = "gemini-pro"
    retries: int = 2
    backoff_base_ms: int = 500
    timeout_s: float = 20.0
    max_inflight: int = 4


@dataclass
class AppConfig:
    data_dir: str = "./planttalk-data"
    species_catalog: str = ""  # path to a catalog JSON; empty = built-in seed
    durability: str = "strict"  # strict | lazy
    retention_days: int = 30
    deficit_threshold: float = 60.0
    alert_debounce: int = 2
    stale_after_s: int = 900
    prompt_char_budget: int = 4000
    eval_interval_s: float = 60.0
    rate_limit_capacity: int = 4
    rate_limit_refill_s: float = 15.0
    sse_heartbeat_s: float = 15.0
    static_dir: str = ""  # built web assets; empty = auto-detect frontend/dist
    llm: LLMConfig = field(default_factory=LLMConfig)


def load_config(path=None) -> AppConfig:
    """Build an AppConfig from a TOML file; missing keys keep their defaults."""
    cfg = AppConfig()
    if path is None:
        return cfg
    raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    _apply(cfg, {k: v for k, v in raw.items() if k != "llm"})
    _apply(cfg.llm, raw.get("llm", {}))
    if cfg.durability not in ("strict", "lazy"):
        raise ValueError(f"durability must be 'strict' or 'lazy', got {cfg.durability!r}")
    if cfg.llm.kind not in ("mock", "remote"):
        raise ValueError(f"llm.kind must be 'mock' or 'remote', got {cfg.llm.kind!r}")
    return cfg


def _apply(target, values: dict) -> None:
    known = {f.name: f.type for f in fields(target)}
    for key, value in values.items():
        if key not in known:
            raise ValueError(f"unknown config key: {key}")
        current = getattr(target, key)
        if isinstance(current, bool) or isinstance(value, dict):
            raise ValueError(f"bad value for config key {key}: {value!r}")
        setattr(target, key, type(current)(value))

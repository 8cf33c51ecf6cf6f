"""FastAPI application: the device wire endpoint, the human REST API, and
the server-sent alert stream."""

from __future__ import annotations

import json
import queue
import time
import urllib.parse
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import schemas
from .alerts import AlertBus, EvaluationLoop
from .chat import ChatService
from .config import AppConfig
from .ingest import IngestError, IngestService, TokenBucket
from .llm import LLMError, build_provider
from .model import Calibration, SpeciesCatalog, UnknownSpeciesError, User
from .mood import MoodEngine, MoodState, TransitionTracker
from .prompting import PromptBudgetError
from .registry import ConflictError, NotFoundError, Registry
from .store import TelemetryStore

# Closed set of machine-readable error codes (documented in the README).
CODE_UNAUTHORIZED = "unauthorized"
CODE_NOT_FOUND = "not_found"
CODE_CONFLICT = "conflict"
CODE_INVALID = "invalid_request"
CODE_LLM_UNAVAILABLE = "llm_unavailable"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class AppContext:
    config: AppConfig
    store: TelemetryStore
    catalog: SpeciesCatalog
    registry: Registry
    ingest: IngestService
    engine: MoodEngine
    tracker: TransitionTracker
    bus: AlertBus
    chat: ChatService
    provider: object
    loop: EvaluationLoop

    def close(self) -> None:
        self.loop.stop()
        self.store.close()


def build_context(config: AppConfig, provider=None) -> AppContext:
    """Wire every component together; `provider` overrides the configured one
    (tests inject capturing or failing providers here)."""
    catalog = (
        SpeciesCatalog.from_file(config.species_catalog)
        if config.species_catalog
        else SpeciesCatalog.default()
    )
    store = TelemetryStore(
        config.data_dir, durability=config.durability, retention_days=config.retention_days
    )
    registry = Registry(store, catalog)
    bucket = TokenBucket(
        capacity=config.rate_limit_capacity, refill_seconds=config.rate_limit_refill_s
    )
    ingest = IngestService(store, registry, bucket)
    engine = MoodEngine(
        store,
        catalog,
        plant_lookup=registry.get_plant,
        channel_lookup=registry.channel_for_plant,
        stale_after_s=config.stale_after_s,
        deficit_threshold=config.deficit_threshold,
    )
    tracker = TransitionTracker(debounce=config.alert_debounce)
    bus = AlertBus()
    provider = provider or build_provider(config.llm)
    chat = ChatService(store, catalog, engine, provider, char_budget=config.prompt_char_budget)
    loop = EvaluationLoop(store, registry, engine, tracker, bus, interval_s=config.eval_interval_s)
    return AppContext(
        config=config,
        store=store,
        catalog=catalog,
        registry=registry,
        ingest=ingest,
        engine=engine,
        tracker=tracker,
        bus=bus,
        chat=chat,
        provider=provider,
        loop=loop,
    )


def _ctx(request: Request) -> AppContext:
    return request.app.state.ctx


def _require_user(request: Request, authorization: Optional[str] = Header(default=None)) -> User:
    if not authorization or not authorization.startswith("Bearer "):
        raise ApiError(401, CODE_UNAUTHORIZED, "missing bearer token")
    user = _ctx(request).registry.user_by_token(authorization[len("Bearer "):].strip())
    if user is None:
        raise ApiError(401, CODE_UNAUTHORIZED, "invalid bearer token")
    return user


def _owned_plant(ctx: AppContext, user: User, plant_id: str):
    plant = ctx.registry.get_plant(plant_id)
    if plant is None or plant.owner_user_id != user.user_id:
        raise ApiError(404, CODE_NOT_FOUND, f"no such plant: {plant_id}")
    return plant


def _mood_out(state: MoodState) -> schemas.MoodOut:
    return schemas.MoodOut(
        label=state.label.value,
        comfort=state.comfort,
        factors={
            m: schemas.MetricFactorOut(value=f.value, score=f.score, lo=f.lo, hi=f.hi)
            for m, f in state.factors.items()
        },
        as_of=state.as_of,
    )


def create_app(config: Optional[AppConfig] = None, provider=None, ctx: Optional[AppContext] = None) -> FastAPI:
    if ctx is None:
        ctx = build_context(config or AppConfig(), provider=provider)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        ctx.store.prune()
        if ctx.config.eval_interval_s > 0:
            ctx.loop.start()
        yield
        ctx.close()

    app = FastAPI(title="planttalk", lifespan=lifespan)
    app.state.ctx = ctx

    @app.exception_handler(ApiError)
    async def _api_error(_request, exc: ApiError):
        body = schemas.ErrorBody(code=exc.code, message=exc.message)
        return JSONResponse(status_code=exc.status, content=body.model_dump())

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        body = schemas.ErrorBody(
            code=CODE_INVALID, message=f"{where}: {first.get('msg', 'invalid request')}"
        )
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    # -- device wire endpoint (plain-text bodies, not the JSON error shape) --

    @app.api_route("/update", methods=["GET", "POST"])
    async def update(request: Request):
        params = dict(request.query_params)
        if request.method == "POST":
            body = await request.body()
            if body:
                params.update(
                    dict(urllib.parse.parse_qsl(body.decode("utf-8"), keep_blank_values=True))
                )
        try:
            seq = await run_in_threadpool(ctx.ingest.handle_update, params)
        except IngestError as exc:
            return PlainTextResponse("0", status_code=exc.status)
        return PlainTextResponse(str(seq))

    # -- auth -----------------------------------------------------------------

    @app.post("/api/register", response_model=schemas.RegisterResponse)
    def register(req: schemas.RegisterRequest):
        try:
            user, token = ctx.registry.create_user(req.login_name)
        except ConflictError as exc:
            raise ApiError(409, CODE_CONFLICT, str(exc))
        except ValueError as exc:
            raise ApiError(400, CODE_INVALID, str(exc))
        return schemas.RegisterResponse(
            user_id=user.user_id, login_name=user.login_name, token=token
        )

    @app.get("/api/whoami", response_model=schemas.WhoamiResponse)
    def whoami(user: User = Depends(_require_user)):
        return schemas.WhoamiResponse(user_id=user.user_id, login_name=user.login_name)

    # -- species + plants -------------------------------------------------------

    @app.get("/api/species", response_model=list[schemas.SpeciesOut])
    def species():
        return [
            schemas.SpeciesOut(
                species_id=p.species_id, display_name=p.display_name, persona=p.persona
            )
            for p in ctx.catalog.profiles()
        ]

    @app.post("/api/plants", response_model=schemas.PlantOut)
    def create_plant(req: schemas.PlantCreateRequest, user: User = Depends(_require_user)):
        try:
            plant = ctx.registry.create_plant(user.user_id, req.species_id, req.nickname)
        except UnknownSpeciesError:
            raise ApiError(400, CODE_INVALID, f"unknown species: {req.species_id}")
        except ValueError as exc:
            raise ApiError(400, CODE_INVALID, str(exc))
        return _plant_out(plant)

    @app.get("/api/plants", response_model=list[schemas.PlantOut])
    def list_plants(user: User = Depends(_require_user)):
        return [_plant_out(p) for p in ctx.registry.list_plants(user.user_id)]

    @app.delete("/api/plants/{plant_id}")
    def delete_plant(plant_id: str, user: User = Depends(_require_user)):
        _owned_plant(ctx, user, plant_id)
        ctx.registry.delete_plant(plant_id)
        ctx.tracker.forget(plant_id)
        return {"deleted": plant_id}

    @app.post("/api/plants/{plant_id}/channel", response_model=schemas.ChannelOut)
    def create_channel(
        plant_id: str,
        req: Optional[schemas.ChannelCreateRequest] = None,
        user: User = Depends(_require_user),
    ):
        _owned_plant(ctx, user, plant_id)
        calibration = {}
        if req and req.calibration:
            try:
                calibration = {
                    f: Calibration(c.raw_min, c.raw_max) for f, c in req.calibration.items()
                }
            except ValueError as exc:
                raise ApiError(400, CODE_INVALID, str(exc))
        try:
            channel = ctx.registry.create_channel(plant_id, calibration)
        except NotFoundError as exc:
            raise ApiError(404, CODE_NOT_FOUND, str(exc))
        except ConflictError as exc:
            raise ApiError(409, CODE_CONFLICT, str(exc))
        return schemas.ChannelOut(
            channel_id=channel.channel_id,
            write_api_key=channel.write_api_key,
            field_map=dict(channel.field_map),
        )

    # -- dashboard + chat -------------------------------------------------------

    @app.get("/api/plants/{plant_id}/dashboard", response_model=schemas.DashboardResponse)
    def dashboard(plant_id: str, user: User = Depends(_require_user)):
        plant = _owned_plant(ctx, user, plant_id)
        now = int(time.time())
        channel = ctx.registry.channel_for_plant(plant_id)
        latest = ctx.store.latest(channel.channel_id) if channel else None
        aggregates = (
            ctx.store.aggregate(channel.channel_id, now - 86400, now, 3600) if channel else []
        )
        state = ctx.engine.evaluate_plant(plant.plant_id, now)
        return schemas.DashboardResponse(
            plant_id=plant_id,
            latest=schemas.ReadingOut(**latest.row()) if latest else None,
            mood=_mood_out(state),
            aggregates=[
                schemas.AggregateOut(
                    window_start=p.window_start,
                    window_len_s=p.window_len_s,
                    stats={
                        m: schemas.MetricStatOut(mean=s.mean, min=s.min, max=s.max, count=s.count)
                        for m, s in p.stats.items()
                    },
                )
                for p in aggregates
            ],
        )

    @app.get("/api/plants/{plant_id}/history", response_model=schemas.HistoryResponse)
    def history(
        plant_id: str,
        limit: int = Query(default=50, ge=1, le=200),
        user: User = Depends(_require_user),
    ):
        _owned_plant(ctx, user, plant_id)
        turns = ctx.chat.history(plant_id, limit)
        return schemas.HistoryResponse(
            plant_id=plant_id, turns=[schemas.TurnOut(**t) for t in turns]
        )

    @app.post("/api/plants/{plant_id}/chat", response_model=schemas.ChatResponse)
    def chat(plant_id: str, req: schemas.ChatRequest, user: User = Depends(_require_user)):
        plant = _owned_plant(ctx, user, plant_id)
        try:
            result = ctx.chat.post_chat(plant, req.message)
        except PromptBudgetError as exc:
            raise ApiError(400, CODE_INVALID, str(exc))
        except ValueError as exc:
            raise ApiError(400, CODE_INVALID, str(exc))
        except LLMError as exc:
            raise ApiError(503, CODE_LLM_UNAVAILABLE, f"language model unavailable: {exc}")
        return schemas.ChatResponse(
            reply=result.reply, mood=_mood_out(result.mood), snapshot_ts=result.snapshot_ts
        )

    # -- alert stream -------------------------------------------------------------

    @app.get("/api/alerts/stream")
    def stream_alerts(user: User = Depends(_require_user)):
        q = ctx.bus.subscribe(user.user_id)
        heartbeat = ctx.config.sse_heartbeat_s

        def gen():
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        alert = q.get(timeout=heartbeat)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"event: mood_alert\ndata: {json.dumps(alert.to_doc())}\n\n"
            finally:
                ctx.bus.unsubscribe(q)

        return StreamingResponse(
            gen(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    static_dir = _static_dir(ctx.config)
    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webui")

    return app


def _plant_out(plant) -> schemas.PlantOut:
    return schemas.PlantOut(
        plant_id=plant.plant_id,
        species_id=plant.species_id,
        nickname=plant.nickname,
        created_at=plant.created_at,
    )


def _static_dir(config: AppConfig) -> Optional[Path]:
    if config.static_dir:
        path = Path(config.static_dir)
        return path if path.is_dir() else None
    default = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return default if default.is_dir() else None

import socket
import threading
import time

import httpx
import pytest
import uvicorn

from planttalk.config import AppConfig
from planttalk.llm import MockProvider
from planttalk.server import build_context, create_app
from planttalk.store import TelemetryStore


@pytest.fixture
def store(tmp_path):
    s = TelemetryStore(tmp_path / "data")
    yield s
    s.close()


def make_config(tmp_path, **overrides) -> AppConfig:
    cfg = AppConfig(
        data_dir=str(tmp_path / "data"),
        eval_interval_s=0,  # evaluation sweeps are triggered manually in tests
        sse_heartbeat_s=0.2,
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


@pytest.fixture
def ctx(tmp_path):
    context = build_context(make_config(tmp_path), provider=MockProvider())
    yield context
    context.close()


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class LiveServer:
    """Real uvicorn server in a thread; needed wherever the buffered test
    client cannot follow (the SSE stream never ends)."""

    def __init__(self, app, port):
        self.port = port
        self.base_url = f"http://127.0.0.1:{port}"
        self._server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        )
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def start(self):
        self._thread.start()
        deadline = time.time() + 10
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.02)

    def stop(self):
        self._server.should_exit = True
        self._thread.join(timeout=10)


@pytest.fixture
def live_env(tmp_path):
    context = build_context(make_config(tmp_path), provider=MockProvider())
    server = LiveServer(create_app(ctx=context), free_port())
    server.start()
    with httpx.Client(base_url=server.base_url, timeout=10.0) as client:
        yield client, context
    server.stop()

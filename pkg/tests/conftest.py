from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
from importlib import resources

import pytest
import requests

from tabletalk.chat import FoodDayCalendar, load_intents


def _data_text(name: str) -> str:
    return resources.files("tabletalk").joinpath(f"data/{name}").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def intents():
    return load_intents(json.loads(_data_text("intents.json")))


@pytest.fixture(scope="session")
def calendar():
    return FoodDayCalendar.from_wire(json.loads(_data_text("food_days.json")))


@pytest.fixture(scope="session")
def sample_corpus_path():
    return str(resources.files("tabletalk").joinpath("data/sample_corpus.ndjson"))


@pytest.fixture(scope="session")
def sample_seed_path():
    return str(resources.files("tabletalk").joinpath("data/sample_seed.json"))


@pytest.fixture(scope="session")
def sample_walk_path():
    return str(resources.files("tabletalk").joinpath("data/sample_walk.json"))


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveServer:
    """Gateway running in a separate process; CLI tests talk HTTP to it."""

    def __init__(self, data_dir: str):
        self.port = free_port()
        self.url = f"http://127.0.0.1:{self.port}"
        self.process = subprocess.Popen(
            [
                sys.executable, "-m", "tabletalk.server",
                "--host", "127.0.0.1", "--port", str(self.port), "--data-dir", data_dir,
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
        )

    def wait_ready(self, timeout=15.0) -> "LiveServer":
        deadline = time.time() + timeout
        while time.time() < deadline:
            if self.process.poll() is not None:
                out = self.process.stdout.read().decode(errors="replace")
                raise RuntimeError(f"server exited early:\n{out}")
            try:
                if requests.get(self.url + "/health", timeout=1).status_code == 200:
                    return self
            except requests.ConnectionError:
                time.sleep(0.05)
        raise RuntimeError("server did not become ready")

    def stop(self) -> None:
        self.process.terminate()
        try:
            self.process.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.process.kill()


@pytest.fixture
def live_server(tmp_path):
    server = LiveServer(str(tmp_path / "data")).wait_ready()
    yield server
    server.stop()

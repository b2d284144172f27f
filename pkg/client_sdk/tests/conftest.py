import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest

from logoground_client import ClientConfig, ScoringClient

FIXTURES = Path(__file__).parent / "fixtures"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def live_server():
    """A real scoring service in a subprocess (requires the server package)."""
    pytest.importorskip("logoground", reason="server package not installed")
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "logoground", "serve", "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base_url = f"http://127.0.0.1:{port}"
    try:
        with ScoringClient(ClientConfig(base_url=base_url, timeout=1.0)) as probe:
            for _ in range(100):
                if proc.poll() is not None:
                    raise RuntimeError("scoring service exited during startup")
                if probe.health():
                    break
                time.sleep(0.1)
            else:
                raise RuntimeError("scoring service never became healthy")
        yield base_url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


@pytest.fixture
def fixture_groups():
    lines = (FIXTURES / "rollout_groups.jsonl").read_text().splitlines()
    return [json.loads(line) for line in lines if line.strip()]


@pytest.fixture
def golden_groups():
    return json.loads((FIXTURES / "score_golden.json").read_text())["groups"]

"""Contract tests against a locally running scoring service."""

import http.server
import threading
import time

import pytest

from logoground_client import ClientConfig, ScoringClient


class TestContractWithLiveService:
    def test_golden_fixture_round_trip(self, live_server, fixture_groups, golden_groups):
        """Client-submitted fixture reproduces the library's breakdowns field-for-field."""
        with ScoringClient(ClientConfig(base_url=live_server)) as client:
            result = client.submit_score_batch(fixture_groups, judge_mode="mock")
        assert result.model_dump(mode="json")["groups"] == golden_groups

    def test_breakdowns_match_direct_library_output(self, live_server, fixture_groups):
        scoring = pytest.importorskip("logoground.scoring")
        rewards = pytest.importorskip("logoground.rewards")

        specs = [
            scoring.group_spec_from_dict(g, index=i) for i, g in enumerate(fixture_groups)
        ]
        direct_groups, _ = scoring.score_batch(
            specs,
            rewards.RewardConfig(),
            judge_mode="mock",
            backend=scoring.make_judge_backend("mock"),
        )
        with ScoringClient(ClientConfig(base_url=live_server)) as client:
            via_client = client.submit_score_batch(fixture_groups, judge_mode="mock")
        assert via_client.model_dump(mode="json")["groups"] == direct_groups

    def test_health_true_on_running_server(self, live_server):
        with ScoringClient(ClientConfig(base_url=live_server)) as client:
            assert client.health() is True

    def test_server_side_validation_surfaces_path(self, live_server, fixture_groups):
        from logoground_client import ServiceRequestError

        with ScoringClient(ClientConfig(base_url=live_server)) as client:
            with pytest.raises(ServiceRequestError) as exc_info:
                client.submit_score_batch(fixture_groups, overrides={"tau": 7.5})
        assert any("config" in path for path in exc_info.value.field_paths)


class TestHealthFailures:
    def test_wrong_port(self):
        with ScoringClient(ClientConfig(base_url="http://127.0.0.1:1", timeout=0.5)) as client:
            assert client.health() is False

    def test_slow_server_beyond_timeout(self):
        class SlowHandler(http.server.BaseHTTPRequestHandler):
            def do_GET(self):
                time.sleep(2.0)
                self.send_response(200)
                self.end_headers()
                self.wfile.write(b"{}")

            def log_message(self, *args):
                pass

        server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), SlowHandler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            base_url = f"http://127.0.0.1:{server.server_port}"
            with ScoringClient(ClientConfig(base_url=base_url, timeout=0.2)) as client:
                assert client.health() is False
        finally:
            server.shutdown()

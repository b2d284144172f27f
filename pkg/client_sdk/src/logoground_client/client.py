"""HTTP client for the scoring service: transport, retries, typed results."""

import time
from dataclasses import dataclass

import httpx
from pydantic import ValidationError

from .models import ConfigOverrides, GroupSubmission, JudgeMode, ScoreBatchResult


class ScoringClientError(Exception):
    """Base class for everything this client raises."""


class ClientValidationError(ScoringClientError):
    """The request failed client-side validation; no network call was made."""


class ServiceRequestError(ScoringClientError):
    """The server rejected the request (4xx/5xx)."""

    def __init__(self, status_code: int, detail, field_paths=None):
        self.status_code = status_code
        self.detail = detail
        self.field_paths = field_paths or []
        paths = f" at {self.field_paths}" if self.field_paths else ""
        super().__init__(f"server rejected request ({status_code}){paths}: {detail}")


class ConnectionFailedError(ScoringClientError):
    """The service could not be reached within the configured retries."""


class ResponseSchemaError(ScoringClientError):
    """The server reply does not match the expected wire schema."""


@dataclass(frozen=True)
class ClientConfig:
    base_url: str
    timeout: float = 10.0
    retries: int = 2
    default_judge_mode: JudgeMode = "off"
    retry_backoff: float = 0.1

    def __post_init__(self):
        if self.timeout <= 0:
            raise ClientValidationError(f"timeout must be > 0, got {self.timeout}")
        if self.retries < 0:
            raise ClientValidationError(f"retries must be >= 0, got {self.retries}")


def _extract_field_paths(detail) -> list:
    paths = []
    if isinstance(detail, list):
        for err in detail:
            loc = err.get("loc") if isinstance(err, dict) else None
            if loc:
                paths.append(".".join(str(part) for part in loc))
    return paths


class ScoringClient:
    """Thin synchronous client; one instance per worker unless the
    underlying transport is shared deliberately."""

    def __init__(self, config: ClientConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._http = httpx.Client(
            base_url=config.base_url, timeout=config.timeout, transport=transport
        )

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def health(self) -> bool:
        """True iff the health endpoint answers successfully within timeout."""
        try:
            return self._http.get("/v1/health").status_code == 200
        except httpx.HTTPError:
            return False

    def submit_score_batch(
        self,
        groups,
        overrides: dict | None = None,
        judge_mode: JudgeMode | None = None,
    ) -> ScoreBatchResult:
        """Score a batch of rollout groups and return typed breakdowns.

        ``groups`` is a list of dicts (or GroupSubmission models) in the
        service request schema. Client-side validation failures raise
        before any network I/O; transport failures retry up to the
        configured count; a server rejection surfaces its field paths.
        """
        if not groups:
            raise ClientValidationError("groups must be a non-empty list")
        try:
            submissions = [
                g if isinstance(g, GroupSubmission) else GroupSubmission.model_validate(g)
                for g in groups
            ]
        except ValidationError as exc:
            raise ClientValidationError(f"invalid group payload: {exc}") from exc

        payload = {
            "groups": [s.model_dump() for s in submissions],
            "judge_mode": judge_mode or self.config.default_judge_mode,
        }
        if overrides:
            try:
                payload["config"] = ConfigOverrides.model_validate(overrides).model_dump(
                    exclude_none=True
                )
            except ValidationError as exc:
                raise ClientValidationError(f"invalid config overrides: {exc}") from exc

        response = self._post_with_retries("/v1/score", payload)
        if response.status_code != 200:
            detail = self._safe_detail(response)
            raise ServiceRequestError(
                response.status_code, detail, _extract_field_paths(detail)
            )
        try:
            return ScoreBatchResult.model_validate(response.json())
        except (ValidationError, ValueError) as exc:
            raise ResponseSchemaError(f"unexpected response shape: {exc}") from exc

    def _post_with_retries(self, path: str, payload: dict) -> httpx.Response:
        last_exc = None
        for attempt in range(self.config.retries + 1):
            try:
                return self._http.post(path, json=payload)
            except httpx.HTTPError as exc:
                last_exc = exc
                if attempt < self.config.retries:
                    time.sleep(self.config.retry_backoff * (attempt + 1))
        raise ConnectionFailedError(
            f"gave up after {self.config.retries + 1} attempt(s): {last_exc}"
        ) from last_exc

    @staticmethod
    def _safe_detail(response: httpx.Response):
        try:
            return response.json().get("detail")
        except ValueError:
            return response.text

"""Reasoning-quality judge: prompt rendering, backends, verdict parsing.

The judge scores a rollout's reasoning on a 1-5 scale. Any backend is a
single ``complete(prompt) -> text`` callable, so the whole pipeline runs
fully offline against the deterministic mock; the remote backend talks
to a chat-completion style endpoint at temperature 0.
"""

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import httpx

from .errors import JudgeProtocolError, JudgeTransportError

_PLACEHOLDER_RE = re.compile(r"\{(prompt_str|response_str|ground_truth)\}")
_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)

ENV_BASE_URL = "JUDGE_BASE_URL"
ENV_API_KEY = "JUDGE_API_KEY"
ENV_MODEL = "JUDGE_MODEL"


def _load_template() -> str:
    return (
        resources.files("logoground")
        .joinpath("templates/judge_prompt.txt")
        .read_text(encoding="utf-8")
    )


_TEMPLATE = _load_template()


@dataclass(frozen=True)
class JudgeRequest:
    """Inputs for one judge call; all fields must be non-empty."""

    prompt_str: str
    response_str: str
    ground_truth: str

    def __post_init__(self):
        for name in ("prompt_str", "response_str", "ground_truth"):
            if not getattr(self, name):
                raise ValueError(f"judge request field {name} must be non-empty")


@dataclass(frozen=True)
class JudgeVerdict:
    """Parsed judge reply: rationale text and an integer score in 1-5.

    ``rationale_overlong`` flags rationales beyond the requested 100
    words; the reward only depends on the score, so this is advisory.
    """

    rationale: str
    score: int
    raw: str
    rationale_overlong: bool = False


def render_judge_prompt(req: JudgeRequest) -> str:
    """Substitute the three placeholders into the scoring prompt template.

    Substitution is single-pass: placeholder-like text inside the request
    fields is emitted literally, never re-expanded.
    """
    values = {
        "prompt_str": req.prompt_str,
        "response_str": req.response_str,
        "ground_truth": req.ground_truth,
    }
    return _PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], _TEMPLATE)


def parse_judge_verdict(raw: str) -> JudgeVerdict:
    """Extract rationale and score from a judge reply.

    Raises JudgeProtocolError (carrying the raw text) when the answer
    segment is missing, non-integer, or outside 1-5.
    """
    answer_match = _ANSWER_RE.search(raw)
    if answer_match is None:
        raise JudgeProtocolError("no answer segment in judge reply", raw=raw)
    score_text = answer_match.group(1).strip()
    if not re.fullmatch(r"[+-]?\d+", score_text):
        raise JudgeProtocolError(f"non-integer judge score {score_text!r}", raw=raw)
    score = int(score_text)
    if not 1 <= score <= 5:
        raise JudgeProtocolError(f"judge score {score} outside 1-5", raw=raw)

    think_match = _THINK_RE.search(raw)
    rationale = think_match.group(1).strip() if think_match else ""
    return JudgeVerdict(
        rationale=rationale,
        score=score,
        raw=raw,
        rationale_overlong=len(rationale.split()) > 100,
    )


@dataclass
class MockJudgeBackend:
    """Deterministic offline judge for tests and dry runs.

    Scores 5 when the ground-truth string appears verbatim in the
    response section of the rendered prompt, else 2. Identical inputs
    always produce identical verdict text.
    """

    seed: int = 0

    _SECTION_RE = re.compile(
        r"Assistant’s Response: (.*)\n\nGround Truth: (.*?)\n\nPlease, based on the above criteria",
        re.DOTALL,
    )

    def complete(self, prompt: str) -> str:
        match = self._SECTION_RE.search(prompt)
        if match is None:
            return "<think>unrecognized prompt layout</think><answer>1</answer>"
        response_str, ground_truth = match.group(1), match.group(2)
        if ground_truth and ground_truth in response_str:
            return (
                "<think>The response cites the reference answer with concrete "
                "visual evidence.</think><answer>5</answer>"
            )
        return (
            "<think>The response does not clearly support the reference "
            "answer.</think><answer>2</answer>"
        )


@dataclass
class RemoteJudgeBackend:
    """Chat-completion backend for a remote judge model.

    Credentials come from the environment (JUDGE_API_KEY); temperature
    is fixed at 0 for reproducibility. Transport-level problems raise
    JudgeTransportError so the batch layer can retry/isolate them.
    """

    base_url: str
    model: str
    timeout: float = 30.0
    temperature: float = 0.0
    _client: httpx.Client = field(default=None, repr=False)

    @classmethod
    def from_env(cls) -> "RemoteJudgeBackend":
        base_url = os.environ.get(ENV_BASE_URL)
        model = os.environ.get(ENV_MODEL)
        if not base_url or not model:
            raise JudgeTransportError(
                f"remote judge needs {ENV_BASE_URL} and {ENV_MODEL} set"
            )
        return cls(base_url=base_url, model=model)

    def _get_client(self) -> httpx.Client:
        if self._client is None:
            headers = {}
            api_key = os.environ.get(ENV_API_KEY)
            if api_key:
                headers["Authorization"] = f"Bearer {api_key}"
            self._client = httpx.Client(
                base_url=self.base_url, headers=headers, timeout=self.timeout
            )
        return self._client

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            resp = self._get_client().post("/chat/completions", json=payload)
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise JudgeTransportError(f"judge endpoint failure: {exc}") from exc


def judge_batch(requests, backend, max_in_flight: int = 8, retries: int = 2):
    """Score a batch of judge requests, results aligned positionally.

    A failure on one item never aborts the batch: each slot holds either
    a JudgeVerdict or a JudgeProtocolError. Transport failures are
    retried up to ``retries`` extra attempts, then surface as a
    protocol error for that slot.
    """
    if not requests:
        return []

    def run_one(req: JudgeRequest):
        prompt = render_judge_prompt(req)
        last_exc = None
        for _ in range(retries + 1):
            try:
                reply = backend.complete(prompt)
                break
            except JudgeTransportError as exc:
                last_exc = exc
        else:
            return JudgeProtocolError(f"transport exhausted: {last_exc}", raw="")
        try:
            return parse_judge_verdict(reply)
        except JudgeProtocolError as exc:
            return exc

    workers = min(max_in_flight, len(requests))
    if workers <= 1:
        return [run_one(r) for r in requests]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, requests))

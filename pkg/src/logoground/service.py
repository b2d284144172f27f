"""HTTP scoring service.

Endpoints:

- ``POST /v1/score``: score a batch of rollout groups
- ``GET /v1/health``: liveness probe
- ``GET /v1/config``: effective server defaults

The service is synchronous request/response (trainers block on rewards
anyway); all shared state is read-only after startup, so concurrent
batches are safe. Responses are deterministic for identical requests
with the mock judge, except for the ``timing`` block.
"""

import hashlib
import json
import threading
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, field_validator

from . import KERNEL_BACKEND, __version__
from .errors import ConfigError, JudgeTransportError
from .geometry import make_box
from .rewards import GroundTruth
from .scoring import (
    GroupSpec,
    ServiceSettings,
    make_judge_backend,
    merge_config,
    score_batch,
)


class GroundTruthModel(BaseModel):
    answer: Literal["A", "B", "C", "D"]
    gt_boxes: list = Field(default_factory=list)

    @field_validator("gt_boxes")
    @classmethod
    def _check_boxes(cls, boxes):
        for idx, raw in enumerate(boxes):
            if not isinstance(raw, (list, tuple)) or len(raw) != 4:
                raise ValueError(f"gt_boxes[{idx}] must be a [x1, y1, x2, y2] quadruple")
            make_box(*raw)  # raises with the offending field name
        return [list(map(float, b)) for b in boxes]


class GroupModel(BaseModel):
    prompt_id: str
    ground_truth: GroundTruthModel
    task_prompt: str = ""
    rollouts: list[str] = Field(min_length=2)


class ConfigOverrides(BaseModel):
    alpha: Optional[float] = None
    tau: Optional[float] = None
    ctr_weight: Optional[float] = None
    group_eps: Optional[float] = None


class ScoreBatchRequestModel(BaseModel):
    groups: list[GroupModel] = Field(min_length=1)
    config: Optional[ConfigOverrides] = None
    judge_mode: Optional[Literal["off", "mock", "remote"]] = None


class JudgeDiag(BaseModel):
    status: str
    score: Optional[int] = None
    detail: Optional[str] = None


class RolloutScoreModel(BaseModel):
    r_acc: float
    r_format: float
    r_bbox_format: float
    r_precision: float
    r_recall: float
    r_ctr: float
    total: float
    answer_choice: Optional[str] = None
    tag_structure_ok: bool
    any_valid_box: bool
    n_clue_boxes: int
    judge: JudgeDiag


class GroupScoreModel(BaseModel):
    prompt_id: str
    rollouts: list[RolloutScoreModel]
    advantages: list[float]


class ScoreBatchResponseModel(BaseModel):
    groups: list[GroupScoreModel]
    timing: dict


def _audit(settings: ServiceSettings, lock: threading.Lock, request_body: dict, groups: list):
    if not settings.audit_log:
        return
    entry = {
        "request_sha256": hashlib.sha256(
            json.dumps(request_body, sort_keys=True).encode()
        ).hexdigest(),
        "response_sha256": hashlib.sha256(
            json.dumps(groups, sort_keys=True).encode()
        ).hexdigest(),
    }
    with lock:
        with open(settings.audit_log, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()
    app = FastAPI(title="logoground scoring service", version=__version__)
    audit_lock = threading.Lock()

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "kernel_backend": KERNEL_BACKEND, "version": __version__}

    @app.get("/v1/config")
    def config():
        return settings.to_dict()

    @app.post("/v1/score", response_model=ScoreBatchResponseModel)
    def score(request: ScoreBatchRequestModel):
        total_rollouts = sum(len(g.rollouts) for g in request.groups)
        if total_rollouts > settings.batch_cap:
            raise HTTPException(
                status_code=400,
                detail=[
                    {
                        "loc": ["body", "groups"],
                        "msg": f"batch holds {total_rollouts} rollouts, cap is "
                        f"{settings.batch_cap}",
                    }
                ],
            )
        overrides = request.config.model_dump(exclude_none=True) if request.config else None
        try:
            cfg = merge_config(settings.reward, overrides)
        except ConfigError as exc:
            raise HTTPException(
                status_code=400, detail=[{"loc": ["body", "config"], "msg": str(exc)}]
            ) from exc

        judge_mode = request.judge_mode or settings.default_judge_mode
        try:
            backend = make_judge_backend(judge_mode)
        except JudgeTransportError as exc:
            raise HTTPException(
                status_code=400, detail=[{"loc": ["body", "judge_mode"], "msg": str(exc)}]
            ) from exc

        specs = [
            GroupSpec(
                prompt_id=g.prompt_id,
                ground_truth=GroundTruth(
                    answer=g.ground_truth.answer,
                    gt_boxes=[make_box(*b) for b in g.ground_truth.gt_boxes],
                ),
                rollouts=g.rollouts,
                task_prompt=g.task_prompt,
            )
            for g in request.groups
        ]
        groups, timing = score_batch(
            specs,
            cfg,
            judge_mode=judge_mode,
            backend=backend,
            judge_concurrency=settings.judge_concurrency,
            judge_retries=settings.judge_retries,
            workers=settings.workers,
        )
        _audit(settings, audit_lock, request.model_dump(), groups)
        return {"groups": groups, "timing": timing}

    return app


app = create_app()

"""Typed mirror of the scoring-service wire schema.

Field names and value semantics match the server exactly; the client
never computes rewards itself, it only transports and types them.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

JudgeMode = Literal["off", "mock", "remote"]


class GroundTruthSpec(BaseModel):
    answer: Literal["A", "B", "C", "D"]
    gt_boxes: list = Field(default_factory=list)


class GroupSubmission(BaseModel):
    prompt_id: str
    ground_truth: GroundTruthSpec
    task_prompt: str = ""
    rollouts: list[str] = Field(min_length=2)


class ConfigOverrides(BaseModel):
    alpha: Optional[float] = None
    tau: Optional[float] = None
    ctr_weight: Optional[float] = None
    group_eps: Optional[float] = None


class JudgeDiagnostics(BaseModel):
    model_config = ConfigDict(extra="forbid")

    status: str
    score: Optional[int] = None
    detail: Optional[str] = None


class RolloutScore(BaseModel):
    model_config = ConfigDict(extra="forbid")

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
    judge: JudgeDiagnostics


class GroupScore(BaseModel):
    model_config = ConfigDict(extra="forbid")

    prompt_id: str
    rollouts: list[RolloutScore]
    advantages: list[float]


class ScoreBatchResult(BaseModel):
    groups: list[GroupScore]
    timing: dict

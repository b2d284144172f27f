"""Batch reward scoring shared by the CLI and the HTTP service.

A batch is a list of rollout groups; each group carries one prompt's
ground truth and its sampled rollouts. Scoring parses every rollout,
computes the reward breakdown, optionally consults the reasoning judge
(deduplicated within the batch), and finishes with group-normalized
advantages. Identical input with the mock judge always produces
identical output.
"""

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigError
from .judge import (
    JudgeRequest,
    JudgeVerdict,
    MockJudgeBackend,
    RemoteJudgeBackend,
    judge_batch,
)
from .parsing import parse_reasoning_response
from .rewards import GroundTruth, RewardConfig, build_rollout_group, score_rollout

JUDGE_MODES = ("off", "mock", "remote")


@dataclass
class GroupSpec:
    """One prompt's ground truth and its sampled rollout texts."""

    prompt_id: str
    ground_truth: GroundTruth
    rollouts: list
    task_prompt: str = ""


@dataclass
class ServiceSettings:
    """Server-side defaults; per-request config overrides merge on top."""

    reward: RewardConfig = field(default_factory=RewardConfig)
    batch_cap: int = 1024
    default_judge_mode: str = "mock"
    judge_concurrency: int = 8
    judge_retries: int = 2
    workers: int = 0
    audit_log: str | None = None

    def __post_init__(self):
        if self.default_judge_mode not in JUDGE_MODES:
            raise ConfigError(
                f"judge mode must be one of {JUDGE_MODES}, got {self.default_judge_mode!r}"
            )
        if self.batch_cap < 1:
            raise ConfigError(f"batch_cap must be >= 1, got {self.batch_cap}")

    @classmethod
    def from_dict(cls, data: dict) -> "ServiceSettings":
        reward = RewardConfig(**data.get("reward", {}))
        known = {k: v for k, v in data.items() if k != "reward"}
        return cls(reward=reward, **known)

    @classmethod
    def from_file(cls, path) -> "ServiceSettings":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "reward": {
                "alpha": self.reward.alpha,
                "tau": self.reward.tau,
                "ctr_weight": self.reward.ctr_weight,
                "group_eps": self.reward.group_eps,
            },
            "batch_cap": self.batch_cap,
            "default_judge_mode": self.default_judge_mode,
            "judge_concurrency": self.judge_concurrency,
            "judge_retries": self.judge_retries,
            "workers": self.workers,
            "audit_log": self.audit_log,
        }


def merge_config(base: RewardConfig, overrides: dict | None) -> RewardConfig:
    """Per-request overrides on top of the server defaults."""
    if not overrides:
        return base
    merged = {
        "alpha": base.alpha,
        "tau": base.tau,
        "ctr_weight": base.ctr_weight,
        "group_eps": base.group_eps,
    }
    unknown = set(overrides) - set(merged)
    if unknown:
        raise ConfigError(f"unknown config override(s): {sorted(unknown)}")
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return RewardConfig(**merged)


def make_judge_backend(judge_mode: str):
    if judge_mode == "off":
        return None
    if judge_mode == "mock":
        return MockJudgeBackend()
    if judge_mode == "remote":
        return RemoteJudgeBackend.from_env()
    raise ConfigError(f"judge mode must be one of {JUDGE_MODES}, got {judge_mode!r}")


def _judge_key(task_prompt: str, rollout_text: str, answer: str) -> str:
    payload = json.dumps([task_prompt, rollout_text, answer], ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _build_judge_request(group: GroupSpec, rollout_text: str) -> JudgeRequest:
    # judge request fields must be non-empty; degrade gracefully
    return JudgeRequest(
        prompt_str=group.task_prompt or "(no task prompt provided)",
        response_str=rollout_text or "(empty response)",
        ground_truth=group.ground_truth.answer,
    )


def score_batch(
    groups,
    cfg: RewardConfig,
    judge_mode: str = "off",
    backend=None,
    judge_concurrency: int = 8,
    judge_retries: int = 2,
    workers: int = 0,
):
    """Score every rollout of every group; returns (group dicts, timing).

    judge_mode "off" zeroes the reasoning reward everywhere; "mock" uses
    the deterministic offline judge; "remote" requires the judge
    environment variables. Judge calls run once per unique
    (task_prompt, rollout, answer) triple per batch, and only for
    rollouts whose final answer is correct (incorrect ones are gated to
    zero regardless of score). A judge failure never fails the batch:
    the affected rollout simply earns no reasoning reward and carries a
    diagnostic.
    """
    if judge_mode not in JUDGE_MODES:
        raise ConfigError(f"judge mode must be one of {JUDGE_MODES}, got {judge_mode!r}")
    for idx, group in enumerate(groups):
        if len(group.rollouts) < 2:
            raise ValueError(
                f"groups[{idx}].rollouts: need at least 2 rollouts per group, "
                f"got {len(group.rollouts)}"
            )

    timing = {}
    t_start = time.perf_counter()

    # parse + answer check
    parsed_groups = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for group in groups:
                parsed_groups.append(list(pool.map(parse_reasoning_response, group.rollouts)))
    else:
        for group in groups:
            parsed_groups.append([parse_reasoning_response(r) for r in group.rollouts])
    timing["parse_s"] = time.perf_counter() - t_start

    # judge pass (deduplicated across the whole batch)
    t_judge = time.perf_counter()
    verdict_by_key = {}
    if judge_mode != "off":
        if backend is None:
            backend = make_judge_backend(judge_mode)
        unique = {}
        for group, parsed_list in zip(groups, parsed_groups):
            for parsed in parsed_list:
                if parsed.answer_choice != group.ground_truth.answer:
                    continue
                key = _judge_key(group.task_prompt, parsed.raw_text, group.ground_truth.answer)
                if key not in unique:
                    unique[key] = _build_judge_request(group, parsed.raw_text)
        keys = list(unique)
        results = judge_batch(
            [unique[k] for k in keys],
            backend,
            max_in_flight=judge_concurrency,
            retries=judge_retries,
        )
        verdict_by_key = dict(zip(keys, results))
    timing["judge_s"] = time.perf_counter() - t_judge

    # rewards + advantages
    t_score = time.perf_counter()
    out_groups = []
    for group, parsed_list in zip(groups, parsed_groups):
        rollout_dicts = []
        scored = []
        for parsed in parsed_list:
            verdict_score = None
            if judge_mode == "off":
                judge_diag = {"status": "off", "score": None, "detail": None}
            elif parsed.answer_choice != group.ground_truth.answer:
                judge_diag = {"status": "skipped_incorrect", "score": None, "detail": None}
            else:
                key = _judge_key(group.task_prompt, parsed.raw_text, group.ground_truth.answer)
                result = verdict_by_key[key]
                if isinstance(result, JudgeVerdict):
                    verdict_score = result.score
                    judge_diag = {"status": "scored", "score": result.score, "detail": None}
                else:
                    judge_diag = {"status": "error", "score": None, "detail": str(result)}
            breakdown = score_rollout(parsed, group.ground_truth, cfg, verdict_score)
            scored.append((parsed, breakdown))
            rollout_dicts.append(
                {
                    "r_acc": breakdown.r_acc,
                    "r_format": breakdown.r_format,
                    "r_bbox_format": breakdown.r_bbox_format,
                    "r_precision": breakdown.r_precision,
                    "r_recall": breakdown.r_recall,
                    "r_ctr": breakdown.r_ctr,
                    "total": breakdown.total,
                    "answer_choice": parsed.answer_choice,
                    "tag_structure_ok": parsed.tag_structure_ok,
                    "any_valid_box": parsed.any_valid_box,
                    "n_clue_boxes": len(parsed.clue_boxes),
                    "judge": judge_diag,
                }
            )
        rollout_group = build_rollout_group(group.prompt_id, scored, cfg)
        out_groups.append(
            {
                "prompt_id": group.prompt_id,
                "rollouts": rollout_dicts,
                "advantages": rollout_group.advantages,
            }
        )
    timing["score_s"] = time.perf_counter() - t_score
    timing["total_s"] = time.perf_counter() - t_start
    return out_groups, timing


def group_spec_from_dict(data: dict, index: int = 0) -> GroupSpec:
    """Decode one group from its JSON form, with a field-path error."""
    from .geometry import make_box

    try:
        gt_data = data["ground_truth"]
        gt_boxes = [make_box(*b) for b in gt_data.get("gt_boxes", [])]
        ground_truth = GroundTruth(answer=gt_data["answer"], gt_boxes=gt_boxes)
        rollouts = list(data["rollouts"])
        if not all(isinstance(r, str) for r in rollouts):
            raise TypeError("rollouts must be strings")
        return GroupSpec(
            prompt_id=str(data["prompt_id"]),
            ground_truth=ground_truth,
            rollouts=rollouts,
            task_prompt=str(data.get("task_prompt", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"groups[{index}]: {exc}") from exc

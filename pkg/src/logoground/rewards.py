"""Composite reward computation and group-relative advantages.

The total reward for one rollout is

    total = alpha * r_acc
          + (1 - alpha) * (r_format + r_bbox_format + r_precision
                           + r_recall + r_ctr)

where r_acc, r_format, r_bbox_format are binary, r_precision/r_recall
come from threshold-gated optimal box matching, and r_ctr is the
down-weighted reasoning-quality judge score, granted only when the
final answer is correct.
"""

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .geometry import hungarian_match, match_deltas
from .parsing import ParsedResponse

ANSWER_CHOICES = ("A", "B", "C", "D")


@dataclass(frozen=True)
class RewardConfig:
    """Tunable reward weights and thresholds.

    tau defaults to the reasoning-stage value 0.3; the perception-stage
    detection task uses 0.5 (the CLI exposes a --stage switch).
    """

    alpha: float = 0.5
    tau: float = 0.3
    ctr_weight: float = 0.5
    group_eps: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not 0.0 < self.tau < 1.0:
            raise ConfigError(f"tau must lie strictly in (0, 1), got {self.tau!r}")
        if self.ctr_weight < 0:
            raise ConfigError(f"ctr_weight must be >= 0, got {self.ctr_weight!r}")
        if self.group_eps <= 0:
            raise ConfigError(f"group_eps must be > 0, got {self.group_eps!r}")


@dataclass(frozen=True)
class GroundTruth:
    """Reference answer and boxes for one prompt.

    Answer D is the "none of the above" option and is the only case
    allowed to carry an empty box set.
    """

    answer: str
    gt_boxes: list

    def __post_init__(self):
        if self.answer not in ANSWER_CHOICES:
            raise ConfigError(f"answer must be one of {ANSWER_CHOICES}, got {self.answer!r}")


@dataclass(frozen=True)
class RewardBreakdown:
    """All reward components plus the aggregate for one rollout."""

    r_acc: float
    r_format: float
    r_bbox_format: float
    r_precision: float
    r_recall: float
    r_ctr: float
    total: float


@dataclass
class RolloutGroup:
    """The sampled rollouts for one prompt with group-normalized advantages."""

    prompt_id: str
    rollouts: list  # (ParsedResponse, RewardBreakdown) pairs
    advantages: list = field(default_factory=list)


def build_rollout_group(prompt_id, scored_rollouts, cfg: RewardConfig) -> RolloutGroup:
    """Assemble a group from (ParsedResponse, RewardBreakdown) pairs.

    Requires at least two rollouts (otherwise there are no group
    statistics); advantages are normalized over the breakdown totals.
    """
    if len(scored_rollouts) < 2:
        raise ValueError(
            f"a rollout group needs >= 2 rollouts, got {len(scored_rollouts)}"
        )
    totals = [breakdown.total for _, breakdown in scored_rollouts]
    return RolloutGroup(
        prompt_id=prompt_id,
        rollouts=list(scored_rollouts),
        advantages=group_advantages(totals, cfg.group_eps),
    )


def grounding_rewards(preds: list, gts: list, tau: float) -> tuple:
    """Precision/recall rewards over the optimal one-to-one matching.

    precision = (matched pairs with IoU > tau) / |preds|
    recall    = (matched pairs with IoU > tau) / |gts|

    Empty sets earn nothing: no predictions means precision 0, no ground
    truth means both 0 (absent evidence is never rewarded).
    """
    if not preds or not gts:
        return 0.0, 0.0
    match = hungarian_match(preds, gts)
    hits = sum(match_deltas(match, tau))
    return hits / len(preds), hits / len(gts)


def accuracy_reward(parsed: ParsedResponse, gt: GroundTruth) -> int:
    """1 iff the parsed answer choice equals the reference answer."""
    return int(parsed.answer_choice is not None and parsed.answer_choice == gt.answer)


def structure_rewards(parsed: ParsedResponse) -> tuple:
    """(tag-structure reward, box-format reward), each 0 or 1.

    Structure rewards only the strict think-then-answer layout; the box
    format bit rewards at least one valid coordinate clue inside the
    think segment. The two are intentionally orthogonal.
    """
    return int(parsed.tag_structure_ok), int(parsed.any_valid_box)


def ctr_reward(verdict_score, answer_correct: bool, cfg: RewardConfig) -> float:
    """Down-weighted reasoning-quality reward, gated on answer correctness.

    A 1-5 judge score maps linearly onto [0, ctr_weight] via
    (score - 1) / 4. Absent or out-of-range scores (judge protocol
    violations, recorded by the caller) earn 0, as does any rollout
    whose final answer is wrong.
    """
    if not answer_correct or verdict_score is None:
        return 0.0
    if verdict_score not in (1, 2, 3, 4, 5):
        return 0.0
    return cfg.ctr_weight * (verdict_score - 1) / 4.0


def final_reward(
    r_acc, r_format, r_bbox_format, r_precision, r_recall, r_ctr, cfg: RewardConfig
) -> float:
    """Aggregate the six components into the total reward."""
    if not 0.0 <= cfg.alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {cfg.alpha!r}")
    return cfg.alpha * r_acc + (1.0 - cfg.alpha) * (
        r_format + r_bbox_format + r_precision + r_recall + r_ctr
    )


def score_rollout(
    parsed: ParsedResponse, gt: GroundTruth, cfg: RewardConfig, verdict_score=None
) -> RewardBreakdown:
    """Full reward breakdown for one parsed rollout."""
    r_format, r_bbox_format = structure_rewards(parsed)
    r_acc = accuracy_reward(parsed, gt)
    r_precision, r_recall = grounding_rewards(parsed.clue_boxes, gt.gt_boxes, cfg.tau)
    r_ctr = ctr_reward(verdict_score, bool(r_acc), cfg)
    total = final_reward(r_acc, r_format, r_bbox_format, r_precision, r_recall, r_ctr, cfg)
    return RewardBreakdown(
        r_acc=float(r_acc),
        r_format=float(r_format),
        r_bbox_format=float(r_bbox_format),
        r_precision=r_precision,
        r_recall=r_recall,
        r_ctr=r_ctr,
        total=total,
    )


def group_advantages(rewards: list, eps: float = 1e-6) -> list:
    """Group-normalized advantages: (r - mean) / (population std + eps).

    A constant group yields all zeros. Requires at least two rewards,
    otherwise there are no group statistics to normalize by.
    """
    n = len(rewards)
    if n < 2:
        raise ValueError(f"advantage normalization needs >= 2 rewards, got {n}")
    first = rewards[0]
    if all(r == first for r in rewards):
        # exact check: summation round-off must not leak noise advantages
        return [0.0] * n
    mean = sum(rewards) / n
    var = sum((r - mean) ** 2 for r in rewards) / n
    std = math.sqrt(var)
    return [(r - mean) / (std + eps) for r in rewards]

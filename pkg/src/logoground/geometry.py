"""Axis-aligned box geometry, IoU, and optimal one-to-one box matching.

All coordinates are absolute pixels in [x1, y1, x2, y2] order with
x1 < x2 and y1 < y2. Matching minimizes total (1 - IoU) over exactly
``min(len(preds), len(gts))`` pairs; ties between equal-cost assignments
are broken toward the lowest (pred_index, gt_index) pair list in
lexicographic order so results are reproducible across runs and
backends.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._backend import kernels
from .errors import BoxValidationError, ConfigError

# Reduced costs within this tolerance of zero count as tight when
# recovering the set of optimal assignments from the solver's potentials.
_TIE_TOL = 1e-9


class BBox(NamedTuple):
    """Axis-aligned rectangle in absolute pixel coordinates."""

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


BoxSet = list  # ordered list of BBox; emission order is meaningful


def check_box(box: BBox) -> None:
    """Raise BoxValidationError naming the offending field if invalid.

    Valid boxes have finite, non-negative coordinates and strictly
    positive width and height. Inverted corners are rejected rather than
    auto-swapped: silent repair would hide the formatting failures the
    box-format reward is meant to penalize.
    """
    for name, value in zip(("x1", "y1", "x2", "y2"), box):
        if not math.isfinite(value):
            raise BoxValidationError(f"box field {name} is not finite: {value!r}")
        if value < 0:
            raise BoxValidationError(f"box field {name} is negative: {value!r}")
    if box.x2 <= box.x1:
        raise BoxValidationError(
            f"box field x2 must exceed x1 (x1={box.x1!r}, x2={box.x2!r})"
        )
    if box.y2 <= box.y1:
        raise BoxValidationError(
            f"box field y2 must exceed y1 (y1={box.y1!r}, y2={box.y2!r})"
        )


def make_box(x1, y1, x2, y2) -> BBox:
    """Build a validated BBox."""
    box = BBox(float(x1), float(y1), float(x2), float(y2))
    check_box(box)
    return box


def try_box(x1, y1, x2, y2):
    """Build a BBox, or return None if it violates the invariants."""
    try:
        return make_box(x1, y1, x2, y2)
    except (BoxValidationError, ValueError, TypeError, OverflowError):
        return None


def boxes_to_array(boxes: Sequence[BBox]) -> np.ndarray:
    """Stack boxes into an (n, 4) float64 array (empty-safe)."""
    if not boxes:
        return np.zeros((0, 4), dtype=np.float64)
    return np.asarray([tuple(b) for b in boxes], dtype=np.float64)


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two valid boxes; 0 when disjoint."""
    a = BBox(*a)
    b = BBox(*b)
    check_box(a)
    check_box(b)
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = (a.area + b.area) - inter
    return inter / union


@dataclass(frozen=True)
class MatchResult:
    """One-to-one correspondence between predicted and ground-truth boxes.

    ``pairs`` holds (pred_index, gt_index, iou) sorted by pred_index;
    ``m`` equals min(|preds|, |gts|) (0 when either side is empty).
    """

    pairs: list
    m: int


def hungarian_match(preds: Sequence[BBox], gts: Sequence[BBox], validate: bool = True) -> MatchResult:
    """Optimal one-to-one matching between two box sets.

    Pair cost is 1 - IoU, so the matching maximizes total matched IoU.
    Exactly min(|preds|, |gts|) pairs are produced; zero-IoU pairs stay
    eligible (thresholding happens later via the delta indicator).
    """
    if validate:
        for b in preds:
            check_box(BBox(*b))
        for b in gts:
            check_box(BBox(*b))
    n_p, n_g = len(preds), len(gts)
    if n_p == 0 or n_g == 0:
        return MatchResult([], 0)

    ious = kernels.iou_matrix(boxes_to_array(preds), boxes_to_array(gts))
    if n_p == 1 and n_g == 1:
        return MatchResult([(0, 0, float(ious[0, 0]))], 1)

    # Pad to square with zero-cost dummy rows/columns; a dummy column
    # assignment means "pred unmatched", a dummy row "gt unmatched".
    n = max(n_p, n_g)
    cost = np.zeros((n, n), dtype=np.float64)
    cost[:n_p, :n_g] = 1.0 - ious
    col_of_row, u, v = kernels.solve_assignment(cost)

    reduced = cost - np.asarray(u)[:, None] - np.asarray(v)[None, :]
    tight_mask = reduced <= _TIE_TOL
    tight = [np.flatnonzero(tight_mask[i]).tolist() for i in range(n)]

    if all(len(t) == 1 for t in tight):
        assignment = [int(c) for c in col_of_row]
    else:
        assignment = _lexmin_tight_matching(tight, n, n_p, n_g, [int(c) for c in col_of_row])

    pairs = [
        (i, assignment[i], float(ious[i, assignment[i]]))
        for i in range(n_p)
        if assignment[i] < n_g
    ]
    return MatchResult(pairs, len(pairs))


def match_deltas(match: MatchResult, tau: float) -> list:
    """Correctness indicators: 1 iff a pair's IoU strictly exceeds tau."""
    if not (0.0 < tau < 1.0):
        raise ConfigError(f"tau must lie strictly in (0, 1), got {tau!r}")
    return [1 if pair_iou > tau else 0 for _, _, pair_iou in match.pairs]


def _lexmin_tight_matching(tight, n, n_real_rows, n_real_cols, current):
    """Lexicographically smallest perfect matching within the tight subgraph.

    Every perfect matching restricted to tight (zero-reduced-cost) edges
    is cost-optimal, so this selects among optimal assignments only. Real
    rows are fixed in index order, preferring real columns in ascending
    index, with "unmatched" (any dummy column) ranked last.
    """
    fixed = {}
    used_cols = set()
    for i in range(n_real_rows):
        cur_col = current[i]
        cur_digit = cur_col if cur_col < n_real_cols else n_real_cols
        chosen = cur_col
        for j in tight[i]:
            digit = j if j < n_real_cols else n_real_cols
            if digit >= cur_digit:
                break  # tight[i] ascending: no better candidate remains
            if j in used_cols:
                continue
            completion = _complete_matching(tight, n, fixed, i, j, used_cols)
            if completion is not None:
                chosen = j
                current = completion
                break
        fixed[i] = chosen
        used_cols.add(chosen)
    return current


def _complete_matching(tight, n, fixed, row, col, used_cols):
    """Perfect matching with ``fixed`` plus row->col forced, or None.

    Kuhn's augmenting-path matching over the remaining rows; returns the
    full assignment (col per row) when every remaining row is matchable.
    """
    banned = used_cols | {col}
    match_col = {}

    def augment(r, seen):
        for c in tight[r]:
            if c in banned or c in seen:
                continue
            seen.add(c)
            if c not in match_col or augment(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    for r in range(n):
        if r in fixed or r == row:
            continue
        if not augment(r, set()):
            return None

    assignment = [0] * n
    for r, c in fixed.items():
        assignment[r] = c
    assignment[row] = col
    for c, r in match_col.items():
        assignment[r] = c
    return assignment

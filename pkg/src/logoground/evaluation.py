"""Dataset-level metrics: choice accuracy/macro-F1, grounding P/R, AP50.

Grounding precision/recall aggregate micro-style (matched counts over
total predicted/ground-truth counts across all records). AP follows the
101-point interpolated protocol at a single IoU threshold with greedy
matching in emission order; model detections carry no confidence
scores, so ranking is by within-image emission order and predictions
sharing a rank step the precision/recall curve as one atomic group
(this keeps the metric invariant to image order).
"""

from dataclasses import dataclass

from ._backend import kernels
from .geometry import boxes_to_array, hungarian_match, match_deltas

CLASSES = ("A", "B", "C", "D")
ABSENT = "absent"


@dataclass(frozen=True)
class ChoicePrediction:
    record_id: str
    predicted: str | None = None  # A-D, or None when unparseable/missing


@dataclass
class EvalReport:
    accuracy: float
    macro_f1: float
    per_class_f1: dict
    confusion: dict  # confusion[gt][predicted-or-"absent"] = count
    grounding_precision: float | None = None
    grounding_recall: float | None = None
    ap50: float | None = None
    n_records: int = 0

    def to_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class_f1": dict(self.per_class_f1),
            "confusion": {k: dict(v) for k, v in self.confusion.items()},
            "grounding_precision": self.grounding_precision,
            "grounding_recall": self.grounding_recall,
            "ap50": self.ap50,
        }

    def render_text(self) -> str:
        def fmt(x):
            return "-" if x is None else f"{x:.4f}"

        lines = [
            f"records              {self.n_records}",
            f"accuracy             {fmt(self.accuracy)}",
            f"macro F1             {fmt(self.macro_f1)}",
        ]
        for cls in CLASSES:
            lines.append(f"F1[{cls}]                {fmt(self.per_class_f1[cls])}")
        lines += [
            f"grounding precision  {fmt(self.grounding_precision)}",
            f"grounding recall     {fmt(self.grounding_recall)}",
            f"AP50                 {fmt(self.ap50)}",
        ]
        return "\n".join(lines)


def evaluate_choices(preds, gts):
    """Accuracy, macro-F1, and confusion counts for the 4-way choice task.

    ``preds``: ChoicePrediction list (missing records count as wrong, in
    the "absent" confusion column). ``gts``: (record_id, answer) pairs,
    unique per record. Per-class F1 uses the 0 convention when undefined
    (no support and no predictions for that class); macro-F1 averages
    all four classes.
    """
    gt_map = {}
    for record_id, answer in gts:
        if record_id in gt_map:
            raise ValueError(f"duplicate ground-truth record_id {record_id!r}")
        if answer not in CLASSES:
            raise ValueError(f"ground-truth answer must be one of {CLASSES}, got {answer!r}")
        gt_map[record_id] = answer
    if not gt_map:
        raise ValueError("no ground-truth records")

    pred_map = {}
    for pred in preds:
        if pred.record_id in pred_map:
            raise ValueError(f"duplicate prediction for record_id {pred.record_id!r}")
        if pred.record_id not in gt_map:
            raise ValueError(f"prediction for unknown record_id {pred.record_id!r}")
        pred_map[pred.record_id] = pred.predicted

    confusion = {c: {p: 0 for p in CLASSES + (ABSENT,)} for c in CLASSES}
    for record_id, answer in gt_map.items():
        predicted = pred_map.get(record_id)
        column = predicted if predicted in CLASSES else ABSENT
        confusion[answer][column] += 1

    total = len(gt_map)
    correct = sum(confusion[c][c] for c in CLASSES)
    accuracy = correct / total

    per_class_f1 = {}
    for c in CLASSES:
        tp = confusion[c][c]
        fn = sum(confusion[c].values()) - tp
        fp = sum(confusion[g][c] for g in CLASSES if g != c)
        denom = 2 * tp + fp + fn
        per_class_f1[c] = (2 * tp / denom) if denom else 0.0
    macro_f1 = sum(per_class_f1.values()) / len(CLASSES)
    return accuracy, macro_f1, per_class_f1, confusion


def evaluate_grounding(pred_sets, gt_sets, tau):
    """Micro-aggregated grounding precision/recall across records.

    Sums threshold-gated matches from per-record optimal matching, then
    divides by the total prediction and ground-truth counts. Empty
    denominators yield 0.
    """
    if len(pred_sets) != len(gt_sets):
        raise ValueError(
            f"pred_sets ({len(pred_sets)}) and gt_sets ({len(gt_sets)}) must be parallel"
        )
    hits = 0
    n_preds = 0
    n_gts = 0
    for preds, gts in zip(pred_sets, gt_sets):
        n_preds += len(preds)
        n_gts += len(gts)
        if preds and gts:
            hits += sum(match_deltas(hungarian_match(preds, gts), tau))
    precision = hits / n_preds if n_preds else 0.0
    recall = hits / n_gts if n_gts else 0.0
    return precision, recall


def _greedy_hits(preds, gts, iou_threshold):
    """Per-rank hit flags for one image: greedy matching in emission order.

    Each prediction takes the unmatched ground-truth box of highest IoU
    at or above the threshold (ties to the lowest index); every gt
    matches at most once.
    """
    if not preds:
        return []
    if not gts:
        return [False] * len(preds)
    ious = kernels.iou_matrix(boxes_to_array(preds), boxes_to_array(gts))
    taken = [False] * len(gts)
    hits = []
    for k in range(len(preds)):
        best_j = -1
        best_iou = iou_threshold
        for j in range(len(gts)):
            if taken[j]:
                continue
            if ious[k, j] > best_iou or (best_j == -1 and ious[k, j] == best_iou):
                best_iou = ious[k, j]
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            hits.append(True)
        else:
            hits.append(False)
    return hits


def ap50(pred_sets, gt_sets, iou_threshold: float = 0.5):
    """101-point interpolated average precision at one IoU threshold.

    Returns None when there is no ground truth at all (AP undefined).
    """
    if len(pred_sets) != len(gt_sets):
        raise ValueError(
            f"pred_sets ({len(pred_sets)}) and gt_sets ({len(gt_sets)}) must be parallel"
        )
    total_gt = sum(len(g) for g in gt_sets)
    if total_gt == 0:
        return None
    max_rank = max((len(p) for p in pred_sets), default=0)
    if max_rank == 0:
        return 0.0

    tier_tp = [0] * max_rank
    tier_fp = [0] * max_rank
    for preds, gts in zip(pred_sets, gt_sets):
        for rank, hit in enumerate(_greedy_hits(preds, gts, iou_threshold)):
            if hit:
                tier_tp[rank] += 1
            else:
                tier_fp[rank] += 1

    points = []  # (recall, precision) after each whole rank tier
    tp = fp = 0
    for rank in range(max_rank):
        tp += tier_tp[rank]
        fp += tier_fp[rank]
        points.append((tp / total_gt, tp / (tp + fp)))

    total = 0.0
    for k in range(101):
        r = k / 100.0
        best = 0.0
        for recall, precision in points:
            if recall >= r and precision > best:
                best = precision
        total += best
    return total / 101.0


def build_report(
    choice_preds,
    gt_answers,
    pred_box_sets=None,
    gt_box_sets=None,
    tau: float = 0.5,
) -> EvalReport:
    """Assemble the full evaluation report; box metrics are optional."""
    accuracy, macro_f1, per_class_f1, confusion = evaluate_choices(choice_preds, gt_answers)
    report = EvalReport(
        accuracy=accuracy,
        macro_f1=macro_f1,
        per_class_f1=per_class_f1,
        confusion=confusion,
        n_records=len(gt_answers),
    )
    if pred_box_sets is not None and gt_box_sets is not None:
        precision, recall = evaluate_grounding(pred_box_sets, gt_box_sets, tau)
        report.grounding_precision = precision
        report.grounding_recall = recall
        report.ap50 = ap50(pred_box_sets, gt_box_sets)
    return report

"""Benchmark record validation and multi-image concatenation.

Records live in line-delimited JSON, one record per line:

    {"record_id": ..., "images": [{"path", "width", "height"}, ...],
     "candidates": [{"brand", "logo_path"}, ...], "answer": "A".."D",
     "gt_boxes": [[[x1, y1, x2, y2], ...] per image], "split": ...}

Concatenation is metadata-only: layouts are planned from image sizes and
ground-truth boxes are translated into the combined canvas, so reward
math never touches pixels. Actual compositing is an optional step used
by the CLI.
"""

import json
from collections import Counter
from dataclasses import dataclass, field

from .errors import CapacityError, DatasetValidationError
from .geometry import BBox, try_box

SPLITS = ("train", "id_test", "ood_test")
ANSWERS = ("A", "B", "C", "D")
CANDIDATE_COUNT = 3
MAX_IMAGES = 16
MIN_IMAGE_SIDE = 224
MAX_IMAGE_SIDE = 1024
DEFAULT_MAX_CANVAS_SIDE = 4096


@dataclass
class ImageRef:
    path: str
    width: int
    height: int


@dataclass
class CandidateLogo:
    brand: str
    logo_path: str


@dataclass
class BenchmarkRecord:
    record_id: str
    images: list
    candidates: list
    answer: str
    gt_boxes: list  # one list of [x1, y1, x2, y2] per image
    split: str


@dataclass(frozen=True)
class ConcatLayout:
    """Placement of source images on a shared canvas."""

    direction: str
    sizes: tuple  # (w, h) per source image
    offsets: tuple  # (dx, dy) per source image
    canvas: tuple  # (width, height)


def record_from_dict(data: dict) -> BenchmarkRecord:
    """Structural decode of one record; shape errors raise."""
    try:
        images = [
            ImageRef(path=str(i["path"]), width=int(i["width"]), height=int(i["height"]))
            for i in data["images"]
        ]
        candidates = [
            CandidateLogo(brand=str(c["brand"]), logo_path=str(c["logo_path"]))
            for c in data["candidates"]
        ]
        gt_boxes = [
            [tuple(float(c) for c in box) for box in per_image]
            for per_image in data["gt_boxes"]
        ]
        return BenchmarkRecord(
            record_id=str(data["record_id"]),
            images=images,
            candidates=candidates,
            answer=str(data["answer"]),
            gt_boxes=gt_boxes,
            split=str(data["split"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetValidationError(f"malformed record: {exc}") from exc


def record_to_dict(record: BenchmarkRecord) -> dict:
    return {
        "record_id": record.record_id,
        "images": [
            {"path": i.path, "width": i.width, "height": i.height} for i in record.images
        ],
        "candidates": [
            {"brand": c.brand, "logo_path": c.logo_path} for c in record.candidates
        ],
        "answer": record.answer,
        "gt_boxes": [[list(box) for box in per_image] for per_image in record.gt_boxes],
        "split": record.split,
    }


def read_records(path):
    """Yield (line_number, record_or_none, error_or_none) per input line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, record_from_dict(json.loads(line)), None
            except (json.JSONDecodeError, DatasetValidationError) as exc:
                yield lineno, None, str(exc)


def plan_concat(sizes, direction: str, max_side: int = DEFAULT_MAX_CANVAS_SIDE) -> ConcatLayout:
    """Cumulative offsets and canvas size for a horizontal/vertical strip."""
    if direction not in ("horizontal", "vertical"):
        raise DatasetValidationError(f"unknown concat direction {direction!r}")
    if not sizes:
        raise DatasetValidationError("cannot plan a layout for zero images")
    if len(sizes) > MAX_IMAGES:
        raise DatasetValidationError(f"too many images: {len(sizes)} > {MAX_IMAGES}")
    sizes = tuple((int(w), int(h)) for w, h in sizes)
    for idx, (w, h) in enumerate(sizes):
        if w < 1 or h < 1:
            raise DatasetValidationError(f"image {idx} has non-positive size {(w, h)}")

    offsets = []
    cursor = 0
    if direction == "horizontal":
        for w, _ in sizes:
            offsets.append((cursor, 0))
            cursor += w
        canvas = (cursor, max(h for _, h in sizes))
    else:
        for _, h in sizes:
            offsets.append((0, cursor))
            cursor += h
        canvas = (max(w for w, _ in sizes), cursor)

    if canvas[0] > max_side or canvas[1] > max_side:
        raise CapacityError(
            f"canvas {canvas} exceeds the maximum side {max_side}; "
            "record needs fewer or smaller images"
        )
    return ConcatLayout(direction=direction, sizes=sizes, offsets=tuple(offsets), canvas=canvas)


def remap_boxes(layout: ConcatLayout, per_image) -> list:
    """Translate per-image boxes into canvas coordinates.

    Output preserves image order, then within-image order. Every box
    must be valid and lie inside its source image; violations raise with
    the image and box index.
    """
    if len(per_image) != len(layout.offsets):
        raise DatasetValidationError(
            f"got boxes for {len(per_image)} images, layout has {len(layout.offsets)}"
        )
    remapped = []
    for img_idx, boxes in enumerate(per_image):
        w, h = layout.sizes[img_idx]
        dx, dy = layout.offsets[img_idx]
        for box_idx, raw in enumerate(boxes):
            box = try_box(*raw)
            if box is None:
                raise DatasetValidationError(
                    f"image {img_idx} box {box_idx} is invalid: {list(raw)}"
                )
            if box.x2 > w or box.y2 > h:
                raise DatasetValidationError(
                    f"image {img_idx} box {box_idx} exceeds image bounds "
                    f"{(w, h)}: {list(raw)}"
                )
            remapped.append(BBox(box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy))
    return remapped


def remap_record(record: BenchmarkRecord, direction: str, max_side: int = DEFAULT_MAX_CANVAS_SIDE):
    """Plan the record's layout and remap its ground-truth boxes."""
    sizes = [(i.width, i.height) for i in record.images]
    try:
        layout = plan_concat(sizes, direction, max_side=max_side)
        return layout, remap_boxes(layout, record.gt_boxes)
    except DatasetValidationError as exc:
        raise DatasetValidationError(f"record {record.record_id}: {exc}") from exc


def validate_record(record: BenchmarkRecord) -> list:
    """All invariant violations for one record (empty list means valid)."""
    reasons = []
    if len(record.candidates) != CANDIDATE_COUNT:
        reasons.append(f"candidate count must be {CANDIDATE_COUNT}, got {len(record.candidates)}")
    if record.answer not in ANSWERS:
        reasons.append(f"answer must be one of {ANSWERS}, got {record.answer!r}")
    if record.split not in SPLITS:
        reasons.append(f"split must be one of {SPLITS}, got {record.split!r}")
    if not record.images:
        reasons.append("record has no images")
    if len(record.images) > MAX_IMAGES:
        reasons.append(f"too many images: {len(record.images)} > {MAX_IMAGES}")
    if len(record.gt_boxes) != len(record.images):
        reasons.append(
            f"gt_boxes groups ({len(record.gt_boxes)}) out of step with images "
            f"({len(record.images)})"
        )

    for idx, image in enumerate(record.images):
        for side_name, side in (("width", image.width), ("height", image.height)):
            if not MIN_IMAGE_SIDE <= side <= MAX_IMAGE_SIDE:
                reasons.append(
                    f"image {idx} {side_name} {side} outside "
                    f"[{MIN_IMAGE_SIDE}, {MAX_IMAGE_SIDE}]"
                )

    total_boxes = 0
    for img_idx, boxes in enumerate(record.gt_boxes[: len(record.images)]):
        image = record.images[img_idx]
        for box_idx, raw in enumerate(boxes):
            total_boxes += 1
            box = try_box(*raw)
            if box is None:
                reasons.append(f"image {img_idx} box {box_idx} is invalid: {list(raw)}")
            elif box.x2 > image.width or box.y2 > image.height:
                reasons.append(
                    f"image {img_idx} box {box_idx} exceeds image bounds: {list(raw)}"
                )
    if record.answer in ("A", "B", "C") and total_boxes == 0:
        reasons.append("records with a candidate answer need at least one ground-truth box")
    return reasons


@dataclass
class RecordIssue:
    line: int
    record_id: str
    reasons: list


@dataclass
class ValidationReport:
    total: int = 0
    passed: int = 0
    issues: list = field(default_factory=list)
    brand_counts: Counter = field(default_factory=Counter)
    split_counts: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, line: int, record, error: str | None):
        self.total += 1
        if error is not None:
            self.issues.append(RecordIssue(line, "<unparsed>", [error]))
            return
        reasons = validate_record(record)
        if reasons:
            self.issues.append(RecordIssue(line, record.record_id, reasons))
            return
        self.passed += 1
        self.split_counts[record.split] += 1
        if record.answer == "D":
            self.brand_counts["(none of the above)"] += 1
        else:
            self.brand_counts[record.candidates[ANSWERS.index(record.answer)].brand] += 1

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "passed": self.passed,
            "failed": len(self.issues),
            "issues": [
                {"line": i.line, "record_id": i.record_id, "reasons": i.reasons}
                for i in self.issues
            ],
            "split_counts": dict(sorted(self.split_counts.items())),
            "brand_counts": dict(self.brand_counts.most_common()),
        }

    def render_text(self) -> str:
        lines = [
            f"records: {self.total}  passed: {self.passed}  failed: {len(self.issues)}",
            "splits: "
            + (
                ", ".join(f"{k}={v}" for k, v in sorted(self.split_counts.items()))
                or "(none)"
            ),
        ]
        top = self.brand_counts.most_common(10)
        if top:
            lines.append("top brands: " + ", ".join(f"{b}={n}" for b, n in top))
        return "\n".join(lines)


def validate_dataset(records) -> ValidationReport:
    """Validate an iterable of (line, record, error) triples or records."""
    report = ValidationReport()
    for item in records:
        if isinstance(item, BenchmarkRecord):
            report.add(report.total + 1, item, None)
        else:
            line, record, error = item
            report.add(line, record, error)
    return report


def compose_record_image(record: BenchmarkRecord, layout: ConcatLayout, images_root, out_path):
    """Paste the record's source images onto one canvas and save losslessly.

    Source files must exist under ``images_root`` and match the metadata
    sizes exactly; a mismatch means the record metadata is stale.
    """
    from pathlib import Path

    from PIL import Image

    canvas = Image.new("RGB", layout.canvas, color=(0, 0, 0))
    for image_ref, (dx, dy), (w, h) in zip(record.images, layout.offsets, layout.sizes):
        src_path = Path(images_root) / image_ref.path
        with Image.open(src_path) as src:
            if src.size != (w, h):
                raise DatasetValidationError(
                    f"record {record.record_id}: image {image_ref.path} is "
                    f"{src.size}, metadata says {(w, h)}"
                )
            canvas.paste(src.convert("RGB"), (dx, dy))
    canvas.save(out_path, format="PNG")

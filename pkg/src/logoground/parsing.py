"""Parsers that turn raw rollout text into structured data.

Two text formats are consumed:

- reasoning responses: ``<think>...</think><answer>...</answer>`` with
  bracketed ``[x1, y1, x2, y2]`` coordinate clues inside the think
  segment;
- detection output: a JSON array of objects (optionally wrapped in a
  single-key object and/or a markdown code fence), each carrying a
  4-number box field.

All parse operations are total: malformed input never raises, it is
reported through flags on the returned structure.
"""

import json
import re
from dataclasses import dataclass, field

from .geometry import BBox, try_box

_NUM = r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?"
_BOX_RE = re.compile(
    rf"\[\s*({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})\s*\]"
)
_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
# Exactly one think segment, then one answer segment, nothing else but
# whitespace. Tag-count checks below keep nested/stray tags out.
_STRICT_RE = re.compile(r"\s*<think>.*?</think>\s*<answer>.*?</answer>\s*", re.DOTALL)
_CHOICES = ("A", "B", "C", "D")


@dataclass
class ParsedResponse:
    """Structured view of one rollout's raw text."""

    raw_text: str
    think_text: str | None = None
    answer_choice: str | None = None
    clue_boxes: list = field(default_factory=list)
    tag_structure_ok: bool = False
    any_valid_box: bool = False


@dataclass
class DetectionOutput:
    """Boxes (and optional parallel labels) parsed from detection JSON."""

    boxes: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    parse_ok: bool = False


def extract_boxes(text: str) -> list:
    """All valid bracketed 4-tuples in ``text``, in textual order.

    Tuples that parse but violate the box invariants (inverted or
    degenerate corners, negative or non-finite coordinates) are dropped.
    """
    boxes = []
    for match in _BOX_RE.finditer(text):
        box = try_box(*(float(g) for g in match.groups()))
        if box is not None:
            boxes.append(box)
    return boxes


def render_boxes(boxes) -> str:
    """Render boxes back to ``[x1, y1, x2, y2]`` text (round-trip safe)."""

    def fmt(c: float) -> str:
        return str(int(c)) if c == int(c) else repr(c)

    return " ".join("[" + ", ".join(fmt(c) for c in box) + "]" for box in boxes)


def parse_reasoning_response(raw: str) -> ParsedResponse:
    """Decompose a rollout into think text, answer choice, and clue boxes.

    Never raises. ``tag_structure_ok`` is true only for exactly one
    think segment followed by exactly one answer segment with nothing
    else around them. Extraction is best-effort on malformed input: an
    unterminated think segment runs to the answer tag or end of text,
    and the first answer segment that reduces to a single letter A-D
    (case-insensitive, surrounding whitespace ignored) sets the choice.
    Only boxes inside the think segment count as coordinate clues.
    """
    tag_structure_ok = (
        raw.count("<think>") == 1
        and raw.count("</think>") == 1
        and raw.count("<answer>") == 1
        and raw.count("</answer>") == 1
        and _STRICT_RE.fullmatch(raw) is not None
    )

    think_match = _THINK_RE.search(raw)
    if think_match is not None:
        think_text = think_match.group(1)
    elif "<think>" in raw:
        tail = raw.split("<think>", 1)[1]
        think_text = tail.split("<answer>", 1)[0]
    else:
        think_text = None

    answer_choice = None
    for match in _ANSWER_RE.finditer(raw):
        candidate = match.group(1).strip().upper()
        if candidate in _CHOICES:
            answer_choice = candidate
            break

    clue_boxes = extract_boxes(think_text) if think_text is not None else []
    return ParsedResponse(
        raw_text=raw,
        think_text=think_text,
        answer_choice=answer_choice,
        clue_boxes=clue_boxes,
        tag_structure_ok=tag_structure_ok,
        any_valid_box=bool(clue_boxes),
    )


def _strip_code_fence(text: str) -> str:
    t = text.strip()
    if not t.startswith("```"):
        return t
    body = t[3:]
    if body.endswith("```"):
        body = body[:-3]
    # drop a language hint on the opening fence line
    first_nl = body.find("\n")
    if first_nl != -1 and re.fullmatch(r"[A-Za-z0-9_+-]*", body[:first_nl].strip()):
        body = body[first_nl + 1 :]
    return body.strip()


def _as_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_detection_json(raw: str, box_key: str = "bbox") -> DetectionOutput:
    """Parse detection output: a JSON array of objects with a box field.

    Accepts a top-level array or an object wrapping one (first
    list-valued field wins), with optional markdown code fences. Any
    structural failure yields ``parse_ok=False`` with no boxes; boxes
    that are well-formed 4-number arrays but violate the box invariants
    are silently dropped (the structure still parses).
    """
    try:
        data = json.loads(_strip_code_fence(raw))
    except (ValueError, RecursionError):
        return DetectionOutput()

    if isinstance(data, dict):
        data = next((v for v in data.values() if isinstance(v, list)), None)
    if not isinstance(data, list):
        return DetectionOutput()

    boxes = []
    labels = []
    for obj in data:
        if not isinstance(obj, dict) or box_key not in obj:
            return DetectionOutput()
        coords = obj[box_key]
        if (
            not isinstance(coords, (list, tuple))
            or len(coords) != 4
            or not all(_as_number(c) for c in coords)
        ):
            return DetectionOutput()
        box = try_box(*(float(c) for c in coords))
        if box is not None:
            boxes.append(box)
            labels.append(obj.get("label"))

    if not all(isinstance(lbl, str) for lbl in labels):
        labels = []
    return DetectionOutput(boxes=boxes, labels=labels, parse_ok=True)

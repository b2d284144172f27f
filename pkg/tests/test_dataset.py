import json
import random

import pytest

from logoground.dataset import (
    BenchmarkRecord,
    CandidateLogo,
    ConcatLayout,
    ImageRef,
    compose_record_image,
    plan_concat,
    read_records,
    record_from_dict,
    record_to_dict,
    remap_boxes,
    remap_record,
    validate_dataset,
    validate_record,
)
from logoground.errors import CapacityError, DatasetValidationError
from logoground.geometry import BBox, iou


def make_record(record_id="r1", n_images=2, answer="B", split="train", **overrides):
    images = [ImageRef(path=f"img_{i}.png", width=320, height=256) for i in range(n_images)]
    candidates = [CandidateLogo(brand=b, logo_path=f"{b}.png") for b in ("acme", "bolt", "cirrus")]
    gt_boxes = [[(10.0, 20.0, 50.0, 60.0)] for _ in range(n_images)]
    record = BenchmarkRecord(
        record_id=record_id,
        images=images,
        candidates=candidates,
        answer=answer,
        gt_boxes=gt_boxes,
        split=split,
    )
    for key, value in overrides.items():
        setattr(record, key, value)
    return record


class TestPlanConcat:
    def test_horizontal(self):
        layout = plan_concat([(300, 200), (400, 300)], "horizontal")
        assert layout.offsets == ((0, 0), (300, 0))
        assert layout.canvas == (700, 300)

    def test_vertical(self):
        layout = plan_concat([(300, 200), (400, 300)], "vertical")
        assert layout.offsets == ((0, 0), (0, 200))
        assert layout.canvas == (400, 500)

    def test_single_image_identity(self):
        layout = plan_concat([(512, 480)], "horizontal")
        assert layout.offsets == ((0, 0),)
        assert layout.canvas == (512, 480)

    def test_empty_rejected(self):
        with pytest.raises(DatasetValidationError):
            plan_concat([], "horizontal")

    def test_too_many_rejected(self):
        with pytest.raises(DatasetValidationError):
            plan_concat([(10, 10)] * 17, "horizontal")

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            plan_concat([(1024, 1024)] * 5, "horizontal")

    def test_bad_direction(self):
        with pytest.raises(DatasetValidationError):
            plan_concat([(10, 10)], "diagonal")

    def test_order_sensitive(self):
        a = plan_concat([(100, 50), (200, 80)], "horizontal")
        b = plan_concat([(200, 80), (100, 50)], "horizontal")
        assert a.offsets == ((0, 0), (100, 0))
        assert b.offsets == ((0, 0), (200, 0))
        assert a.canvas == b.canvas == (300, 80)

    def test_vertical_matches_transposed_horizontal(self):
        # brute-force cross-check: vertical layout is the transpose of
        # horizontal layout on swapped sizes
        rng = random.Random(31)
        for _ in range(100):
            sizes = [(rng.randint(1, 300), rng.randint(1, 300)) for _ in range(rng.randint(1, 5))]
            vert = plan_concat(sizes, "vertical")
            horiz = plan_concat([(h, w) for w, h in sizes], "horizontal")
            assert vert.canvas == (horiz.canvas[1], horiz.canvas[0])
            assert vert.offsets == tuple((dy, dx) for dx, dy in horiz.offsets)


class TestRemapBoxes:
    def test_translation(self):
        layout = plan_concat([(300, 200), (400, 300)], "horizontal")
        remapped = remap_boxes(layout, [[], [(10, 20, 50, 60)]])
        assert remapped == [BBox(310, 20, 350, 60)]

    def test_empty_sets(self):
        layout = plan_concat([(300, 200), (400, 300)], "horizontal")
        assert remap_boxes(layout, [[], []]) == []

    def test_order_image_then_box(self):
        layout = plan_concat([(100, 100), (100, 100)], "vertical")
        remapped = remap_boxes(layout, [[(0, 0, 10, 10), (20, 20, 30, 30)], [(5, 5, 9, 9)]])
        assert remapped == [
            BBox(0, 0, 10, 10),
            BBox(20, 20, 30, 30),
            BBox(5, 105, 9, 109),
        ]

    def test_out_of_bounds_names_indexes(self):
        layout = plan_concat([(100, 100)], "horizontal")
        with pytest.raises(DatasetValidationError, match="image 0 box 0"):
            remap_boxes(layout, [[(50, 50, 150, 80)]])

    def test_invalid_box_rejected(self):
        layout = plan_concat([(100, 100)], "horizontal")
        with pytest.raises(DatasetValidationError, match="invalid"):
            remap_boxes(layout, [[(50, 50, 10, 10)]])

    def test_length_mismatch(self):
        layout = plan_concat([(100, 100)], "horizontal")
        with pytest.raises(DatasetValidationError):
            remap_boxes(layout, [[], []])

    def test_iou_preserved_exactly(self):
        rng = random.Random(32)
        for _ in range(300):
            n_images = rng.randint(1, 5)
            sizes = [(rng.randint(80, 400), rng.randint(80, 400)) for _ in range(n_images)]
            direction = rng.choice(["horizontal", "vertical"])
            layout = plan_concat(sizes, direction)
            per_image = []
            for w, h in sizes:
                boxes = []
                for _ in range(rng.randint(0, 3)):
                    x1, y1 = rng.randint(0, w - 2), rng.randint(0, h - 2)
                    boxes.append(
                        (x1, y1, rng.randint(x1 + 1, w), rng.randint(y1 + 1, h))
                    )
                per_image.append(boxes)
            remapped = remap_boxes(layout, per_image)
            # pairwise IoU within each source image survives translation
            cursor = 0
            for img_idx, boxes in enumerate(per_image):
                group = remapped[cursor : cursor + len(boxes)]
                for i in range(len(boxes)):
                    for j in range(i + 1, len(boxes)):
                        src_iou = iou(BBox(*map(float, boxes[i])), BBox(*map(float, boxes[j])))
                        assert iou(group[i], group[j]) == src_iou
                cursor += len(boxes)
            # canvas containment
            cw, ch = layout.canvas
            for box in remapped:
                assert 0 <= box.x1 < box.x2 <= cw
                assert 0 <= box.y1 < box.y2 <= ch

    def test_remap_record_names_record(self):
        record = make_record()
        record.gt_boxes = [[(10, 20, 50, 60)], [(0, 0, 9999, 9999)]]
        with pytest.raises(DatasetValidationError, match="record r1"):
            remap_record(record, "horizontal")


class TestValidateRecord:
    def test_well_formed(self):
        assert validate_record(make_record()) == []

    def test_candidate_count(self):
        record = make_record()
        record.candidates = record.candidates[:2]
        assert any("candidate count" in r for r in validate_record(record))

    def test_bad_answer(self):
        record = make_record(answer="E")
        assert any("answer" in r for r in validate_record(record))

    def test_bad_split(self):
        record = make_record(split="dev")
        assert any("split" in r for r in validate_record(record))

    def test_image_side_bounds(self):
        record = make_record()
        record.images[0].width = 100
        assert any("width 100" in r for r in validate_record(record))
        record = make_record()
        record.images[0].height = 2000
        assert any("height 2000" in r for r in validate_record(record))

    def test_box_out_of_bounds(self):
        record = make_record()
        record.gt_boxes[0] = [(0, 0, 999, 999)]
        assert any("exceeds image bounds" in r for r in validate_record(record))

    def test_candidate_answer_needs_boxes(self):
        record = make_record(answer="A")
        record.gt_boxes = [[], []]
        assert any("at least one ground-truth box" in r for r in validate_record(record))

    def test_none_of_the_above_may_be_boxless(self):
        record = make_record(answer="D")
        record.gt_boxes = [[], []]
        assert validate_record(record) == []


class TestValidateDataset:
    def test_synthetic_violations_found_exactly(self):
        records = [make_record(record_id=f"ok{i}") for i in range(95)]
        bad_ids = set()
        bad = make_record(record_id="bad_candidates")
        bad.candidates = bad.candidates[:2]
        records.append(bad)
        bad_ids.add(bad.record_id)
        bad = make_record(record_id="bad_answer", answer="Z")
        records.append(bad)
        bad_ids.add(bad.record_id)
        bad = make_record(record_id="bad_split", split="validation")
        records.append(bad)
        bad_ids.add(bad.record_id)
        bad = make_record(record_id="bad_box")
        bad.gt_boxes[1] = [(5, 5, 5, 9)]
        records.append(bad)
        bad_ids.add(bad.record_id)
        bad = make_record(record_id="bad_side")
        bad.images[1].width = 10_000
        records.append(bad)
        bad_ids.add(bad.record_id)

        rng = random.Random(33)
        rng.shuffle(records)
        report = validate_dataset(records)
        assert report.total == 100
        assert report.passed == 95
        assert {i.record_id for i in report.issues} == bad_ids

    def test_brand_and_split_histograms(self):
        records = [
            make_record(record_id="a", answer="A", split="train"),
            make_record(record_id="b", answer="A", split="train"),
            make_record(record_id="c", answer="B", split="id_test"),
            make_record(record_id="d", answer="D", split="ood_test"),
        ]
        report = validate_dataset(records)
        assert report.brand_counts["acme"] == 2
        assert report.brand_counts["bolt"] == 1
        assert report.brand_counts["(none of the above)"] == 1
        assert report.split_counts == {"train": 2, "id_test": 1, "ood_test": 1}

    def test_report_text_renders(self):
        report = validate_dataset([make_record()])
        text = report.render_text()
        assert "passed: 1" in text


class TestRecordIo:
    def test_round_trip(self, tmp_path):
        records = [make_record(record_id=f"r{i}") for i in range(5)]
        path = tmp_path / "records.jsonl"
        with open(path, "w") as fh:
            for record in records:
                fh.write(json.dumps(record_to_dict(record)) + "\n")
        loaded = list(read_records(path))
        assert all(err is None for _, _, err in loaded)
        assert [record_to_dict(rec) for _, rec, _ in loaded] == [
            record_to_dict(r) for r in records
        ]

    def test_bad_line_reported_not_raised(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text('{"record_id": "x"}\nnot json\n')
        loaded = list(read_records(path))
        assert loaded[0][2] is not None  # missing keys
        assert loaded[1][2] is not None  # not JSON

    def test_schema_field_names(self):
        data = record_to_dict(make_record())
        assert set(data) == {"record_id", "images", "candidates", "answer", "gt_boxes", "split"}
        assert set(data["images"][0]) == {"path", "width", "height"}
        assert set(data["candidates"][0]) == {"brand", "logo_path"}
        rebuilt = record_from_dict(json.loads(json.dumps(data)))
        assert record_to_dict(rebuilt) == data


class TestComposeImage:
    def test_composite_and_sizes(self, tmp_path):
        PIL_Image = pytest.importorskip("PIL.Image")
        rng = random.Random(34)
        record = make_record(n_images=2)
        record.images[0] = ImageRef("a.png", 60, 40)
        record.images[1] = ImageRef("b.png", 30, 50)
        record.gt_boxes = [[], []]
        for ref, color in zip(record.images, [(255, 0, 0), (0, 255, 0)]):
            PIL_Image.new("RGB", (ref.width, ref.height), color).save(tmp_path / ref.path)
        layout = plan_concat([(60, 40), (30, 50)], "horizontal")
        out = tmp_path / "composite.png"
        compose_record_image(record, layout, tmp_path, out)
        with PIL_Image.open(out) as img:
            assert img.size == layout.canvas == (90, 50)
            assert img.getpixel((10, 10)) == (255, 0, 0)
            assert img.getpixel((70, 10)) == (0, 255, 0)
            assert img.getpixel((10, 45)) == (0, 0, 0)  # uncovered area

    def test_size_mismatch_rejected(self, tmp_path):
        PIL_Image = pytest.importorskip("PIL.Image")
        record = make_record(n_images=1)
        record.images[0] = ImageRef("a.png", 60, 40)
        PIL_Image.new("RGB", (10, 10)).save(tmp_path / "a.png")
        layout = plan_concat([(60, 40)], "horizontal")
        with pytest.raises(DatasetValidationError, match="metadata"):
            compose_record_image(record, layout, tmp_path, tmp_path / "out.png")

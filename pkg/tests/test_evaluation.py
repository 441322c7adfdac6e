import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apronid.errors import DimensionMismatch, EmptySample, NonPositiveActual, UnknownCode
from apronid.evaluation import (
    METRIC_NAMES,
    DetectionRecord,
    GroundTruthRecord,
    build_confusion_matrix,
    coco_evaluate,
    length_accuracy_pct,
    mask_iou,
    match_detections,
    mean_detected_length,
)
from apronid.geometry import PixelMask
from apronid.identification import default_type_db

W = H = 40


def block(x0, y0, w, h, width=W, height=H):
    arr = np.zeros((height, width), dtype=bool)
    arr[y0:y0 + h, x0:x0 + w] = True
    return PixelMask(arr)


def iou60_pair():
    # gt 10x10 = 100 px, det is 60 px inside it: IoU = 60/100
    return block(0, 0, 10, 10), block(0, 0, 10, 6)


def test_iou_examples():
    a = block(0, 0, 2, 2, 4, 4)
    b = block(1, 0, 2, 2, 4, 4)
    assert mask_iou(a, a) == 1.0
    assert mask_iou(a, block(2, 2, 2, 2, 4, 4)) == 0.0
    assert mask_iou(a, b) == pytest.approx(1 / 3)
    with pytest.raises(DimensionMismatch):
        mask_iou(a, block(0, 0, 1, 1, 5, 5))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 8), st.integers(0, 8), st.integers(1, 8), st.integers(1, 8),
       st.integers(0, 8), st.integers(0, 8), st.integers(1, 8), st.integers(1, 8))
def test_iou_properties(x0, y0, w0, h0, x1, y1, w1, h1):
    a = block(x0, y0, w0, h0, 16, 16)
    b = block(x1, y1, w1, h1, 16, 16)
    assert mask_iou(a, b) == mask_iou(b, a)
    assert 0.0 <= mask_iou(a, b) <= 1.0
    assert mask_iou(a, a) == 1.0


def test_match_threshold():
    gt_mask, det_mask = iou60_pair()
    gt = GroundTruthRecord("i", gt_mask, "CM2")
    det = DetectionRecord("i", det_mask, 0.9)
    assert match_detections([det], [gt], 0.5) == [(det, gt)]
    assert match_detections([det], [gt], 0.6) == [(det, gt)]
    assert match_detections([det], [gt], 0.75) == [(det, None)]


def test_match_greedy_by_score():
    gt = GroundTruthRecord("i", block(0, 0, 10, 10), "CM2")
    low = DetectionRecord("i", block(0, 0, 10, 10), 0.8)
    high = DetectionRecord("i", block(0, 0, 10, 9), 0.9)
    pairs = match_detections([low, high], [gt], 0.5)
    assert pairs == [(high, gt), (low, None)]


def test_match_prefers_highest_iou_then_earliest_gt():
    g1 = GroundTruthRecord("i", block(0, 0, 10, 10), "CM2")
    g2 = GroundTruthRecord("i", block(0, 0, 10, 8), "CM2")
    det = DetectionRecord("i", block(0, 0, 10, 8), 0.5)
    assert match_detections([det], [g1, g2], 0.5) == [(det, g2)]
    twin = GroundTruthRecord("i", block(0, 0, 10, 8), "CM2")
    assert match_detections([det], [g2, twin], 0.5) == [(det, g2)]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20), st.floats(0, 1)), max_size=8),
       st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), max_size=6))
def test_matching_is_one_to_one(dets_spec, gts_spec):
    dets = [DetectionRecord("i", block(x, y, 10, 10), s) for x, y, s in dets_spec]
    gts = [GroundTruthRecord("i", block(x, y, 10, 10), "CM2") for x, y in gts_spec]
    pairs = match_detections(dets, gts, 0.3)
    assert len(pairs) == len(dets)
    matched = [id(g) for _, g in pairs if g is not None]
    assert len(matched) == len(set(matched))


def test_coco_single_detection_iou_060():
    gt_mask, det_mask = iou60_pair()
    m = coco_evaluate([DetectionRecord("i", det_mask, 0.42)], [GroundTruthRecord("i", gt_mask)])
    expected = {
        "ap": 0.3, "ap50": 1.0, "ap75": 0.0,
        "ap_small": 0.3, "ap_medium": -1.0, "ap_large": -1.0,
        "ar_max1": 0.3, "ar_max10": 0.3, "ar_max100": 0.3,
        "ar_small": 0.3, "ar_medium": -1.0, "ar_large": -1.0,
    }
    for name, value in expected.items():
        assert getattr(m, name) == pytest.approx(value, abs=1e-6), name


def test_coco_perfect_detector():
    masks = [block(0, 0, 10, 10), block(0, 0, 39, 39), block(5, 5, 20, 20)]
    gts = [GroundTruthRecord(f"im{k}", m) for k, m in enumerate(masks)]
    dets = [DetectionRecord(f"im{k}", m, 1.0) for k, m in enumerate(masks)]
    m = coco_evaluate(dets, gts)
    for name in METRIC_NAMES:
        if name.endswith("large"):
            assert getattr(m, name) == -1.0
        else:
            assert getattr(m, name) == pytest.approx(1.0, abs=1e-6), name


def test_coco_no_detections():
    gts = [GroundTruthRecord("a", block(0, 0, 10, 10)), GroundTruthRecord("b", block(0, 0, 35, 35))]
    m = coco_evaluate([], gts)
    assert m.ap == m.ap50 == m.ap75 == m.ap_small == m.ap_medium == 0.0
    assert m.ar_max1 == m.ar_max10 == m.ar_max100 == m.ar_small == m.ar_medium == 0.0
    assert m.ap_large == m.ar_large == -1.0


def test_coco_empty_everything():
    m = coco_evaluate([], [])
    assert all(v == -1.0 for v in m.as_dict().values())


def pr_scenario():
    # three ground truths over two images; four detections in score order
    # TP(0.9) FP(0.8) TP(0.7) TP(0.6), every TP an exact overlap
    a1, a2, b1 = block(0, 0, 10, 10), block(20, 20, 10, 10), block(5, 5, 10, 10)
    gts = [GroundTruthRecord("A", a1), GroundTruthRecord("A", a2), GroundTruthRecord("B", b1)]
    dets = [
        DetectionRecord("A", a1, 0.9),
        DetectionRecord("B", block(25, 0, 10, 10), 0.8),
        DetectionRecord("A", a2, 0.7),
        DetectionRecord("B", b1, 0.6),
    ]
    return dets, gts


def test_coco_hand_computed_pr_curve():
    dets, gts = pr_scenario()
    m = coco_evaluate(dets, gts)
    # recall points 0.00..0.33 see precision 1; 0.34..1.00 see max(2/3, 3/4)
    expected_ap = (34 * 1.0 + 67 * 0.75) / 101
    assert m.ap == pytest.approx(expected_ap, abs=1e-9)
    assert m.ap50 == pytest.approx(expected_ap, abs=1e-9)
    assert m.ar_max100 == pytest.approx(1.0)
    # top-1 per image: A keeps 0.9 (TP), B keeps 0.8 (FP) -> recall 1/3
    assert m.ar_max1 == pytest.approx(1 / 3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4, unique=True))
def test_ap_invariant_under_monotone_rescaling(scores):
    dets, gts = pr_scenario()
    base = [DetectionRecord(d.image_id, d.mask, s) for d, s in zip(dets, scores)]
    squashed = [DetectionRecord(d.image_id, d.mask, d.score ** 3 / 2) for d in base]
    assert coco_evaluate(base, gts) == coco_evaluate(squashed, gts)


def test_ap_non_increasing_in_threshold():
    from fractions import Fraction

    from apronid.evaluation import IOU_THRESHOLDS, ImageOverlaps, _evaluate_cell

    rng = np.random.default_rng(2)
    ovs = []
    for k in range(6):
        gts = [block(int(rng.integers(0, 25)), int(rng.integers(0, 25)), 12, 12) for _ in range(3)]
        dets = [block(int(rng.integers(0, 25)), int(rng.integers(0, 25)), 12, 12) for _ in range(4)]
        ovs.append(ImageOverlaps.from_masks(str(k), dets, rng.random(4), gts))
    aps = [_evaluate_cell(ovs, t, "all", (100,))[100] for t in IOU_THRESHOLDS]
    for (ap0, r0), (ap1, r1) in zip(aps, aps[1:]):
        assert ap1 <= ap0 + 1e-12
        assert r1 <= r0 + 1e-12
    assert isinstance(IOU_THRESHOLDS[0], Fraction)


def test_mean_detected_length():
    assert mean_detected_length([10, 20, 30]) == 20.0
    assert mean_detected_length([35.0]) == 35.0
    assert mean_detected_length([34.2, 35.9, 34.9]) == pytest.approx(35.0, abs=1e-9)
    with pytest.raises(EmptySample):
        mean_detected_length([])


def test_length_accuracy():
    assert length_accuracy_pct(73, 73) == 100
    assert length_accuracy_pct(72.27, 73) == 99
    assert length_accuracy_pct(0, 73) == 0
    assert length_accuracy_pct(500, 73) == 0
    with pytest.raises(NonPositiveActual):
        length_accuracy_pct(1, 0)


@given(st.floats(0.01, 1e4), st.floats(0, 1e4))
def test_length_accuracy_range(actual, measured):
    assert length_accuracy_pct(actual, actual) == 100
    assert 0 <= length_accuracy_pct(measured, actual) <= 100


def test_confusion_lm100j_row_layout():
    db = default_type_db()
    pairs = [("LM100J", "LM100J")] * 9 + [("LM100J", "G-650")] * 2 + [("LM100J", "A-320")]
    cm = build_confusion_matrix(pairs, db)
    assert cm.row("LM100J") == [9, 0, 0, 2, 0, 0, 0, 0, 1]
    assert cm.counts.sum() == 12


def test_confusion_diagonal_and_empty():
    db = default_type_db()
    cm = build_confusion_matrix([(c, c) for c in db.codes], db)
    assert cm.is_diagonal() and cm.counts.trace() == 9
    empty = build_confusion_matrix([], db)
    assert empty.counts.shape == (9, 9) and not empty.counts.any()
    with pytest.raises(UnknownCode):
        build_confusion_matrix([("LM100J", "B747")], db)


@given(st.lists(st.tuples(st.sampled_from(default_type_db().codes),
                          st.sampled_from(default_type_db().codes))))
def test_confusion_row_sums(pairs):
    db = default_type_db()
    cm = build_confusion_matrix(pairs, db)
    for code, row in zip(cm.codes, cm.counts):
        assert row.sum() == sum(1 for a, _ in pairs if a == code)
    assert cm.counts.sum() == len(pairs)


def test_confusion_csv():
    db = default_type_db()
    text = build_confusion_matrix([("CM2", "CJ4")], db).to_csv()
    lines = text.splitlines()
    assert lines[0] == "actual\\predicted," + ",".join(db.codes)
    assert lines[6] == "CM2,0,0,0,0,1,0,0,0,0"

"""Detection and identification metrics.

COCO-style average precision/recall is computed from per-image overlap
tables of exact integer intersection and union pixel counts, so every IoU
threshold test is an exact rational comparison.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from apronid.errors import DimensionMismatch, EmptySample, NonPositiveActual, UnknownCode
from apronid.geometry import PixelMask, mask_diameter_px
from apronid.identification import TypeDatabase, classify_by_length
from apronid.photogrammetry import length_m, surface_area_m2

IOU_THRESHOLDS = tuple(Fraction(p, 100) for p in range(50, 100, 5))
RECALL_POINTS = np.linspace(0.0, 1.0, 101)
MAX_DETS = (1, 10, 100)
SMALL_MAX = 32 ** 2
LARGE_MIN = 96 ** 2
AREA_BUCKETS = ("all", "small", "medium", "large")

METRIC_NAMES = (
    "ap", "ap50", "ap75", "ap_small", "ap_medium", "ap_large",
    "ar_max1", "ar_max10", "ar_max100", "ar_small", "ar_medium", "ar_large",
)


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    mask: PixelMask
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")
        if self.mask.pixel_count == 0:
            raise ValueError("detection mask is empty")


@dataclass(frozen=True)
class GroundTruthRecord:
    image_id: str
    mask: PixelMask
    type_code: str = ""

    def __post_init__(self):
        if self.mask.pixel_count == 0:
            raise ValueError("ground-truth mask is empty")


@dataclass(frozen=True)
class CocoMetrics:
    ap: float
    ap50: float
    ap75: float
    ap_small: float
    ap_medium: float
    ap_large: float
    ar_max1: float
    ar_max10: float
    ar_max100: float
    ar_small: float
    ar_medium: float
    ar_large: float

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


# ---------------------------------------------------------------------------
# overlaps and matching

def _overlap(a: PixelMask, b: PixelMask) -> tuple[int, int]:
    if a.data.shape != b.data.shape:
        raise DimensionMismatch(
            f"masks differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    inter = int(np.count_nonzero(a.data & b.data))
    union = int(np.count_nonzero(a.data | b.data))
    return inter, union


def mask_iou(a: PixelMask, b: PixelMask) -> float:
    inter, union = _overlap(a, b)
    return inter / union if union else 0.0


@dataclass
class ImageOverlaps:
    """Everything the COCO accumulator needs to know about one image."""

    image_id: str
    det_scores: np.ndarray
    det_areas: np.ndarray
    gt_areas: np.ndarray
    inter: list  # [det][gt] -> int
    union: list

    @classmethod
    def from_masks(cls, image_id, det_masks, det_scores, gt_masks):
        inter = []
        union = []
        for d in det_masks:
            row_i, row_u = [], []
            for g in gt_masks:
                i, u = _overlap(d, g)
                row_i.append(i)
                row_u.append(u)
            inter.append(row_i)
            union.append(row_u)
        return cls(
            image_id=image_id,
            det_scores=np.asarray(det_scores, dtype=float).reshape(-1),
            det_areas=np.array([m.pixel_count for m in det_masks], dtype=np.int64),
            gt_areas=np.array([m.pixel_count for m in gt_masks], dtype=np.int64),
            inter=inter,
            union=union,
        )

    def score_order(self) -> np.ndarray:
        return np.argsort(-self.det_scores, kind="stable")


def _as_fraction(threshold) -> Fraction:
    if isinstance(threshold, Fraction):
        return threshold
    # decimal reading of the float, so 0.6 means exactly 3/5
    return Fraction(repr(float(threshold)))


def _greedy(ov: ImageOverlaps, order, thr: Fraction, gt_ignore=None):
    """Greedy matching in the given detection order.

    Returns ``(det_gt, det_on_ignored)`` where ``det_gt[k]`` is the matched
    ground-truth index of ``order[k]`` or -1. Non-ignored ground truths are
    preferred; among them the highest IoU wins, earliest index on ties.
    """
    n_gt = len(ov.gt_areas)
    if gt_ignore is None:
        gt_ignore = [False] * n_gt
    taken = [False] * n_gt
    det_gt = []
    det_on_ignored = []
    num, den = thr.numerator, thr.denominator
    for d in order:
        inter_row, union_row = ov.inter[d], ov.union[d]
        best = -1
        best_ignored = True
        for g in range(n_gt):
            if taken[g]:
                continue
            i, u = inter_row[g], union_row[g]
            if i * den < num * u:
                continue
            ign = bool(gt_ignore[g])
            if best >= 0:
                if ign and not best_ignored:
                    continue
                if ign == best_ignored and i * union_row[best] <= inter_row[best] * u:
                    continue
            best, best_ignored = g, ign
        if best >= 0:
            taken[best] = True
        det_gt.append(best)
        det_on_ignored.append(best >= 0 and best_ignored)
    return det_gt, det_on_ignored


def _group_by_image(dets, gts):
    ids = []
    seen = set()
    for rec in list(gts) + list(dets):
        if rec.image_id not in seen:
            seen.add(rec.image_id)
            ids.append(rec.image_id)
    det_by = {i: [] for i in ids}
    gt_by = {i: [] for i in ids}
    for d in dets:
        det_by[d.image_id].append(d)
    for g in gts:
        gt_by[g.image_id].append(g)
    return ids, det_by, gt_by


def match_detections(dets: Sequence[DetectionRecord], gts: Sequence[GroundTruthRecord],
                     iou_threshold: float = 0.5):
    """Greedy score-ordered matching per image.

    Returns ``(detection, ground_truth_or_None)`` pairs grouped by image and
    sorted by descending score within each image. Ground truths that appear
    in no pair are the false negatives.
    """
    thr = _as_fraction(iou_threshold)
    if not 0 < thr <= 1:
        raise ValueError(f"IoU threshold must be in (0, 1], got {iou_threshold}")
    ids, det_by, gt_by = _group_by_image(dets, gts)
    out = []
    for image_id in ids:
        d_list, g_list = det_by[image_id], gt_by[image_id]
        ov = ImageOverlaps.from_masks(image_id, [d.mask for d in d_list],
                                      [d.score for d in d_list], [g.mask for g in g_list])
        order = ov.score_order()
        det_gt, _ = _greedy(ov, order, thr)
        for k, d in enumerate(order):
            out.append((d_list[d], g_list[det_gt[k]] if det_gt[k] >= 0 else None))
    return out


# ---------------------------------------------------------------------------
# COCO accumulation

def _in_bucket(areas: np.ndarray, bucket: str) -> np.ndarray:
    if bucket == "all":
        return np.ones(areas.shape, dtype=bool)
    if bucket == "small":
        return areas < SMALL_MAX
    if bucket == "medium":
        return (areas >= SMALL_MAX) & (areas <= LARGE_MIN)
    if bucket == "large":
        return areas > LARGE_MIN
    raise ValueError(bucket)


def _evaluate_cell(images: list[ImageOverlaps], thr: Fraction, bucket: str, max_dets: Sequence[int]):
    """AP and recall for one (threshold, area bucket), for each detection cap.

    Returns ``{cap: (ap, recall)}``; both are -1 when the bucket holds no
    ground truth.
    """
    top = max(max_dets)
    per_image = []
    n_pos = 0
    for ov in images:
        gt_ignore = ~_in_bucket(ov.gt_areas, bucket)
        n_pos += int((~gt_ignore).sum())
        order = ov.score_order()[:top]
        det_gt, on_ignored = _greedy(ov, order, thr, gt_ignore)
        det_out = ~_in_bucket(ov.det_areas[order], bucket)
        matched = np.array([g >= 0 for g in det_gt], dtype=bool)
        ignore = np.array(on_ignored, dtype=bool) | (~matched & det_out)
        per_image.append((ov.det_scores[order], matched, ignore))

    result = {}
    for cap in max_dets:
        if n_pos == 0:
            result[cap] = (-1.0, -1.0)
            continue
        if per_image:
            scores = np.concatenate([s[:cap] for s, _, _ in per_image])
            tps = np.concatenate([m[:cap] for _, m, _ in per_image])
            ign = np.concatenate([i[:cap] for _, _, i in per_image])
        else:
            scores = np.empty(0)
            tps = ign = np.empty(0, dtype=bool)
        order = np.argsort(-scores, kind="mergesort")
        tps = tps[order][~ign[order]]
        if tps.size == 0:
            result[cap] = (0.0, 0.0)
            continue
        tp_cum = np.cumsum(tps)
        fp_cum = np.cumsum(~tps)
        recall = tp_cum / n_pos
        precision = tp_cum / (tp_cum + fp_cum)
        # interpolated precision: best precision at any recall >= r
        precision = np.maximum.accumulate(precision[::-1])[::-1]
        idx = np.searchsorted(recall, RECALL_POINTS, side="left")
        sampled = np.where(idx < len(precision), precision[np.minimum(idx, len(precision) - 1)], 0.0)
        result[cap] = (float(sampled.mean()), float(recall[-1]))
    return result


def _mean_valid(values) -> float:
    valid = [v for v in values if v > -1]
    return float(np.mean(valid)) if valid else -1.0


def coco_from_overlaps(images: list[ImageOverlaps]) -> CocoMetrics:
    cells = {}
    for thr in IOU_THRESHOLDS:
        for bucket in AREA_BUCKETS:
            caps = MAX_DETS if bucket == "all" else (MAX_DETS[-1],)
            cells[thr, bucket] = _evaluate_cell(images, thr, bucket, caps)
    top = MAX_DETS[-1]

    def ap(bucket, thresholds=IOU_THRESHOLDS):
        return _mean_valid([cells[t, bucket][top][0] for t in thresholds])

    def ar(bucket, cap):
        return _mean_valid([cells[t, bucket][cap][1] for t in IOU_THRESHOLDS])

    return CocoMetrics(
        ap=ap("all"),
        ap50=ap("all", (Fraction(1, 2),)),
        ap75=ap("all", (Fraction(3, 4),)),
        ap_small=ap("small"),
        ap_medium=ap("medium"),
        ap_large=ap("large"),
        ar_max1=ar("all", 1),
        ar_max10=ar("all", 10),
        ar_max100=ar("all", 100),
        ar_small=ar("small", top),
        ar_medium=ar("medium", top),
        ar_large=ar("large", top),
    )


def coco_evaluate(dets: Sequence[DetectionRecord], gts: Sequence[GroundTruthRecord]) -> CocoMetrics:
    """Twelve COCO-style summary metrics for a single object category."""
    ids, det_by, gt_by = _group_by_image(dets, gts)
    images = [
        ImageOverlaps.from_masks(
            i, [d.mask for d in det_by[i]], [d.score for d in det_by[i]], [g.mask for g in gt_by[i]]
        )
        for i in ids
    ]
    return coco_from_overlaps(images)


# ---------------------------------------------------------------------------
# length statistics and confusion

def mean_detected_length(lengths: Sequence[float]) -> float:
    if len(lengths) == 0:
        raise EmptySample("cannot average zero lengths")
    return math.fsum(lengths) / len(lengths)


def length_accuracy_pct(mean_detected_m: float, actual_m: float) -> int:
    """Relative-error complement in percent, clamped to [0, 100], rounded half up."""
    if not actual_m > 0:
        raise NonPositiveActual(f"actual length must be positive, got {actual_m}")
    pct = 100.0 * (1.0 - abs(mean_detected_m - actual_m) / actual_m)
    pct = min(100.0, max(0.0, pct))
    # 1e-9 absorbs representation error such as 98.99999999999999
    return int(math.floor(pct + 0.5 + 1e-9))


@dataclass
class ConfusionMatrix:
    codes: list[str]
    counts: np.ndarray  # rows actual, columns predicted

    def row(self, code: str) -> list[int]:
        return self.counts[self.codes.index(code)].tolist()

    def to_dict(self) -> dict:
        return {"codes": list(self.codes), "counts": self.counts.tolist()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["actual\\predicted", *self.codes])
        for code, row in zip(self.codes, self.counts.tolist()):
            writer.writerow([code, *row])
        return buf.getvalue()

    def is_diagonal(self) -> bool:
        return not np.any(self.counts - np.diag(np.diag(self.counts)))

    def off_diagonal(self) -> list[tuple[str, str, int]]:
        out = []
        for i, a in enumerate(self.codes):
            for j, p in enumerate(self.codes):
                if i != j and self.counts[i, j]:
                    out.append((a, p, int(self.counts[i, j])))
        return out


def build_confusion_matrix(pairs, db: TypeDatabase) -> ConfusionMatrix:
    codes = db.codes
    index = {c: i for i, c in enumerate(codes)}
    counts = np.zeros((len(codes), len(codes)), dtype=np.int64)
    for actual, predicted in pairs:
        for code in (actual, predicted):
            if code not in index:
                raise UnknownCode(f"type code {code!r} not in database")
        counts[index[actual], index[predicted]] += 1
    return ConfusionMatrix(codes, counts)


# ---------------------------------------------------------------------------
# dataset driver

@dataclass(frozen=True)
class TypeAccuracy:
    code: str
    full_name: str
    actual_length_m: float
    n: int
    mean_length_m: float | None
    accuracy_pct: int | None
    mean_area_m2: float | None

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "full_name": self.full_name,
            "actual_length_m": self.actual_length_m,
            "n": self.n,
            "mean_length_m": self.mean_length_m,
            "accuracy_pct": self.accuracy_pct,
            "mean_area_m2": self.mean_area_m2,
        }


@dataclass
class EvalReport:
    coco: CocoMetrics
    per_type: list[TypeAccuracy]
    average_accuracy_pct: float | None
    confusion: ConfusionMatrix
    gsd_cm_per_px: float
    iou_threshold: float
    n_images: int
    n_ground_truth: int
    n_detections: int
    matched: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        from apronid import __version__

        return {
            "version": __version__,
            "gsd_cm_per_px": self.gsd_cm_per_px,
            "iou_threshold": self.iou_threshold,
            "counts": {
                "images": self.n_images,
                "ground_truth": self.n_ground_truth,
                "detections": self.n_detections,
                "matched": len(self.matched),
            },
            "coco": self.coco.as_dict(),
            "per_type": [t.to_dict() for t in self.per_type],
            "average_accuracy_pct": self.average_accuracy_pct,
            "confusion": self.confusion.to_dict(),
            "matches": self.matched,
        }

    def summary(self) -> str:
        lines = ["COCO metrics"]
        for name, value in self.coco.as_dict().items():
            lines.append(f"  {name:<10} {value:6.3f}")
        lines.append("")
        lines.append(f"{'type':<8} {'n':>4} {'actual m':>9} {'mean m':>8} {'acc %':>6}")
        for t in self.per_type:
            mean = f"{t.mean_length_m:8.2f}" if t.mean_length_m is not None else f"{'-':>8}"
            acc = f"{t.accuracy_pct:6d}" if t.accuracy_pct is not None else f"{'-':>6}"
            lines.append(f"{t.code:<8} {t.n:4d} {t.actual_length_m:9.2f} {mean} {acc}")
        avg = "-" if self.average_accuracy_pct is None else f"{self.average_accuracy_pct:.0f}"
        lines.append(f"average accuracy: {avg}")
        lines.append("")
        lines.append("confusion (rows actual, columns predicted)")
        width = max(len(c) for c in self.confusion.codes) + 1
        lines.append(" " * width + "".join(f"{c:>{width}}" for c in self.confusion.codes))
        for code, row in zip(self.confusion.codes, self.confusion.counts.tolist()):
            lines.append(f"{code:<{width}}" + "".join(f"{v:>{width}}" for v in row))
        return "\n".join(lines)


def evaluate_dataset(manifest, db: TypeDatabase, iou_threshold: float = 0.5, backend=None) -> EvalReport:
    """Run detection metrics, length measurement and type assignment over a manifest.

    Detections matched to a ground truth at ``iou_threshold`` are measured
    (hull diameter scaled by the manifest GSD), classified by nearest length,
    and tallied against the ground-truth type.
    """
    from apronid.dataio import load_entry_mask

    thr = _as_fraction(iou_threshold)
    gsd = manifest.gsd
    overlaps = []
    pairs = []
    lengths = {code: [] for code in db.codes}
    areas = {code: [] for code in db.codes}
    matched = []
    n_gt = n_det = 0
    for image in manifest.images:
        for k, g in enumerate(image.ground_truth):
            if g.type_code not in db:
                raise UnknownCode(
                    f"image {image.id!r} ground_truth[{k}]: type code {g.type_code!r} not in database"
                )
        gt_masks = [load_entry_mask(g, image) for g in image.ground_truth]
        det_masks = [load_entry_mask(d, image) for d in image.detections]
        ov = ImageOverlaps.from_masks(image.id, det_masks, [d.score for d in image.detections], gt_masks)
        overlaps.append(ov)
        n_gt += len(gt_masks)
        n_det += len(det_masks)

        order = ov.score_order()
        det_gt, _ = _greedy(ov, order, thr)
        for d, g in zip(order, det_gt):
            if g < 0 or det_masks[d].pixel_count == 0:
                continue
            actual = image.ground_truth[g].type_code
            measured = length_m(mask_diameter_px(det_masks[d], backend), gsd)
            predicted = classify_by_length(measured, db)
            pairs.append((actual, predicted))
            lengths[actual].append(measured)
            areas[actual].append(surface_area_m2(det_masks[d].pixel_count, gsd))
            matched.append({
                "image_id": image.id,
                "detection": int(d),
                "ground_truth": int(g),
                "actual": actual,
                "predicted": predicted,
                "length_m": measured,
            })
        del gt_masks, det_masks

    per_type = []
    for entry in db.entries:
        xs = lengths[entry.code]
        if xs:
            mean = mean_detected_length(xs)
            acc = length_accuracy_pct(mean, entry.actual_length_m)
            area = mean_detected_length(areas[entry.code])
        else:
            mean = acc = area = None
        per_type.append(TypeAccuracy(entry.code, entry.full_name, entry.actual_length_m,
                                     len(xs), mean, acc, area))
    accs = [t.accuracy_pct for t in per_type if t.accuracy_pct is not None]
    average = sum(accs) / len(accs) if accs else None

    return EvalReport(
        coco=coco_from_overlaps(overlaps),
        per_type=per_type,
        average_accuracy_pct=average,
        confusion=build_confusion_matrix(pairs, db),
        gsd_cm_per_px=gsd.cm_per_px,
        iou_threshold=float(iou_threshold),
        n_images=len(manifest.images),
        n_ground_truth=n_gt,
        n_detections=n_det,
        matched=matched,
    )

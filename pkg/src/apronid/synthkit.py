"""Synthetic aircraft-like masks with known measurements.

A pixel is foreground iff its center lies inside the closed shape. The
ground-truth diameter is enumerated over the rasterized boundary pixels, so
it is the exact value a correct measurement of the mask must return.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from apronid.dataio import manifest_document, save_mask, write_json
from apronid.errors import DegenerateSpec
from apronid.geometry import PixelMask, brute_force_diameter_sq
from apronid.identification import TypeDatabase
from apronid.photogrammetry import GroundSampleDistance

SHAPES = ("rectangle", "ellipse", "cross")
MARGIN_PX = 2

# cross proportions, as fractions of the fuselage length
FUSELAGE_WIDTH = 0.1
WING_CHORD = 0.15

# minor/major axis ratio of the ellipses written by synth_dataset
DATASET_ASPECT = 0.2


@dataclass(frozen=True)
class SynthSpec:
    """Shape parameters.

    ``length_m`` is the long axis. ``secondary_m`` is the width of a
    rectangle or ellipse, or the wingspan of a cross. ``heading_deg`` turns
    the long axis from the image x axis toward increasing rows.
    """

    shape: str
    length_m: float
    secondary_m: float
    heading_deg: float = 0.0
    gsd: GroundSampleDistance = GroundSampleDistance(100.0)
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not (self.length_m > 0 and self.secondary_m > 0):
            raise DegenerateSpec("shape dimensions must be positive")
        if self.shape != "cross" and self.length_m < self.secondary_m:
            raise DegenerateSpec("length_m must be >= secondary_m for rectangles and ellipses")


@dataclass(frozen=True)
class SynthTruth:
    diameter_px: float
    diameter_sq: int
    pixel_count: int


def _half_extents(spec: SynthSpec, theta: float):
    """Half-size of the rotated shape's bounding box in pixels."""
    scale = spec.gsd.m_per_px
    a = spec.length_m / scale / 2
    if spec.shape == "cross":
        b = spec.secondary_m / scale / 2
        c, s = abs(math.cos(theta)), abs(math.sin(theta))
        fw = FUSELAGE_WIDTH * a
        wc = WING_CHORD * a
        hx = max(a * c + fw * s, wc * c + b * s)
        hy = max(a * s + fw * c, wc * s + b * c)
        return hx, hy
    b = spec.secondary_m / scale / 2
    c, s = math.cos(theta), math.sin(theta)
    if spec.shape == "ellipse":
        return math.hypot(a * c, b * s), math.hypot(a * s, b * c)
    return a * abs(c) + b * abs(s), a * abs(s) + b * abs(c)


def rasterize(spec: SynthSpec) -> PixelMask:
    """Center-inclusion raster of ``spec`` on a canvas fitted around it."""
    # all shapes are point-symmetric; folding the heading keeps theta and
    # theta + 180 bit-identical
    theta = math.radians(spec.heading_deg % 180.0)
    hx, hy = _half_extents(spec, theta)
    # round first so cos(90 deg) ~ 6e-17 cannot add a spare pixel column
    width = math.ceil(round(2 * hx, 9)) + 2 * MARGIN_PX
    height = math.ceil(round(2 * hy, 9)) + 2 * MARGIN_PX
    cx, cy = (width - 1) / 2, (height - 1) / 2
    xs = np.arange(width, dtype=float) - cx
    ys = np.arange(height, dtype=float) - cy
    c, s = math.cos(theta), math.sin(theta)
    # shape frame: u along the long axis, v across it
    u = xs[None, :] * c + ys[:, None] * s
    v = -xs[None, :] * s + ys[:, None] * c
    scale = spec.gsd.m_per_px
    a = spec.length_m / scale / 2
    b = spec.secondary_m / scale / 2
    if spec.shape == "rectangle":
        inside = (np.abs(u) <= a) & (np.abs(v) <= b)
    elif spec.shape == "ellipse":
        inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    else:
        fuselage = (np.abs(u) <= a) & (np.abs(v) <= FUSELAGE_WIDTH * a)
        wing = (np.abs(u) <= WING_CHORD * a) & (np.abs(v) <= b)
        inside = fuselage | wing
    if not inside.any():
        raise DegenerateSpec(f"{spec.shape} covers no pixel center at {spec.gsd}")
    return PixelMask(inside)


def boundary_points(mask: PixelMask) -> np.ndarray:
    """Foreground pixels with a 4-neighbour outside the foreground."""
    data = np.pad(mask.data, 1)
    core = data[1:-1, 1:-1]
    interior = core & data[:-2, 1:-1] & data[2:, 1:-1] & data[1:-1, :-2] & data[1:-1, 2:]
    ys, xs = np.nonzero(core & ~interior)
    return np.stack([xs, ys], axis=1).astype(np.int64)


def mask_truth(mask: PixelMask) -> SynthTruth:
    # the farthest pair always sits on the boundary
    d2 = brute_force_diameter_sq(boundary_points(mask))
    return SynthTruth(math.sqrt(d2), d2, mask.pixel_count)


def synth_mask(spec: SynthSpec) -> tuple[PixelMask, SynthTruth]:
    mask = rasterize(spec)
    return mask, mask_truth(mask)


def synth_dataset(db: TypeDatabase, per_type_count: int, noise_rel: float, seed: int,
                  out_dir, gsd: GroundSampleDistance = GroundSampleDistance(3.13),
                  mask_format: str = "png") -> Path:
    """Write a one-aircraft-per-image dataset and return the manifest path.

    Each instance is an ellipse whose major axis is the type's actual length
    scaled by ``1 + u``, ``u`` uniform in ``[-noise_rel, noise_rel]``, at a
    random heading. Detections reuse the ground-truth mask with score 1.0.
    """
    if per_type_count < 0:
        raise ValueError("per_type_count must be >= 0")
    if not 0 <= noise_rel < 0.5:
        raise ValueError("noise_rel must be in [0, 0.5)")
    if mask_format not in ("png", "rle"):
        raise ValueError(f"mask_format must be png or rle, got {mask_format!r}")
    out_dir = Path(out_dir)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)

    children = np.random.SeedSequence(seed).spawn(len(db) * per_type_count)
    images = []
    k = 0
    for entry in db.entries:
        for i in range(per_type_count):
            rng = np.random.default_rng(children[k])
            k += 1
            u = rng.uniform(-noise_rel, noise_rel) if noise_rel > 0 else 0.0
            heading = float(rng.uniform(0.0, 180.0))
            length = entry.actual_length_m * (1.0 + u)
            spec = SynthSpec("ellipse", length, DATASET_ASPECT * length, heading, gsd, seed)
            mask = rasterize(spec)
            image_id = f"{entry.code}_{i:04d}"
            rel = f"masks/{image_id}.{mask_format}"
            save_mask(mask, out_dir / rel)
            images.append({
                "id": image_id,
                "width": mask.width,
                "height": mask.height,
                "ground_truth": [{"mask_path": rel, "type_code": entry.code}],
                "detections": [{"mask_path": rel, "score": 1.0}],
            })
    manifest_path = out_dir / "manifest.json"
    write_json(manifest_document(gsd.cm_per_px, images), manifest_path)
    return manifest_path

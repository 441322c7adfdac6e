"""Mask, manifest and report file formats.

Masks are stored one object instance per file, either as 8-bit grayscale PNG
(any nonzero value is foreground) or as RLE text::

    <width> <height>
    <run> <run> ...

Runs alternate background/foreground over the row-major raster, starting with
a (possibly zero) background run.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from apronid.errors import (
    DecodeError,
    DimensionMismatch,
    GsdMissing,
    InvalidCamera,
    MissingMaskFile,
    RunSumMismatch,
    SchemaError,
    UnsupportedPngFlavor,
)
from apronid.geometry import PixelMask
from apronid.photogrammetry import CameraModel, GroundSampleDistance, compute_gsd


# ---------------------------------------------------------------------------
# PNG

def load_mask_png(path) -> PixelMask:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such mask file: {path}")
    try:
        with Image.open(path) as img:
            if img.format != "PNG":
                raise DecodeError(f"{path}: not a PNG file ({img.format})")
            if img.mode != "L":
                raise UnsupportedPngFlavor(f"{path}: expected 8-bit grayscale PNG, got mode {img.mode}")
            arr = np.asarray(img)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return PixelMask(arr > 0)


def save_mask_png(mask: PixelMask, path) -> None:
    img = Image.fromarray(np.where(mask.data, 255, 0).astype(np.uint8), mode="L")
    img.save(path, format="PNG", optimize=False)


# ---------------------------------------------------------------------------
# RLE

@dataclass(frozen=True)
class RleMask:
    width: int
    height: int
    runs: tuple[int, ...]

    def to_text(self) -> str:
        return f"{self.width} {self.height}\n" + " ".join(str(r) for r in self.runs)

    @classmethod
    def from_text(cls, text: str) -> "RleMask":
        lines = [ln.rstrip("\r") for ln in text.split("\n")]
        while lines and lines[-1] == "":
            lines.pop()
        if len(lines) not in (1, 2):
            raise DecodeError(f"RLE text must have 2 lines, got {len(lines)}")
        try:
            dims = [int(t) for t in lines[0].split()]
            runs = [int(t) for t in lines[1].split()] if len(lines) == 2 else []
        except ValueError as exc:
            raise DecodeError(f"bad RLE token: {exc}") from None
        if len(dims) != 2 or dims[0] < 0 or dims[1] < 0:
            raise DecodeError(f"bad RLE header {lines[0]!r}")
        if any(r < 0 for r in runs):
            raise DecodeError("negative RLE run")
        return cls(dims[0], dims[1], tuple(runs))


def rle_encode(mask: PixelMask) -> RleMask:
    flat = mask.data.ravel()
    if flat.size == 0:
        return RleMask(mask.width, mask.height, (0,))
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return RleMask(mask.width, mask.height, tuple(runs))


def rle_decode(rle: RleMask) -> PixelMask:
    total = rle.width * rle.height
    if sum(rle.runs) != total:
        raise RunSumMismatch(f"runs sum to {sum(rle.runs)}, expected {total}")
    values = np.arange(len(rle.runs)) % 2 == 1
    flat = np.repeat(values, rle.runs)
    return PixelMask(flat.reshape(rle.height, rle.width))


def load_mask_rle(path) -> PixelMask:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such mask file: {path}")
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(f"{path}: {exc}") from None
    try:
        return rle_decode(RleMask.from_text(text))
    except (DecodeError, RunSumMismatch) as exc:
        raise type(exc)(f"{path}: {exc}") from None


def save_mask_rle(mask: PixelMask, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rle_encode(mask).to_text() + "\n")


def load_mask(path) -> PixelMask:
    """Load a mask file, choosing the decoder by extension (``.png`` / ``.rle``)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".rle":
        return load_mask_rle(path)
    if suffix == ".png":
        return load_mask_png(path)
    raise DecodeError(f"{path}: unknown mask extension {suffix!r}")


def save_mask(mask: PixelMask, path) -> None:
    if Path(path).suffix.lower() == ".rle":
        save_mask_rle(mask, path)
    else:
        save_mask_png(mask, path)


# ---------------------------------------------------------------------------
# Manifest

@dataclass(frozen=True)
class GroundTruthEntry:
    mask_path: Path
    type_code: str


@dataclass(frozen=True)
class DetectionEntry:
    mask_path: Path
    score: float


@dataclass(frozen=True)
class ImageEntry:
    id: str
    width: int
    height: int
    ground_truth: tuple[GroundTruthEntry, ...] = ()
    detections: tuple[DetectionEntry, ...] = ()


@dataclass(frozen=True)
class DatasetManifest:
    gsd: GroundSampleDistance
    images: tuple[ImageEntry, ...]
    camera: CameraModel | None = None
    explicit_gsd: bool = True
    root: Path = field(default_factory=Path)


_TOP_KEYS = {"gsd_cm_per_px", "camera", "images"}
_CAMERA_KEYS = ("sensor_width_mm", "altitude_m", "focal_length_mm", "image_width_px")
_IMAGE_KEYS = {"id", "width", "height", "ground_truth", "detections"}


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_keys(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r}", path)
    for key in required:
        if key not in obj:
            raise SchemaError(f"missing required key {key!r}", path)


def _mask_ref(value, root: Path, path: str) -> Path:
    if not isinstance(value, str) or not value:
        raise SchemaError("mask_path must be a non-empty string", path)
    resolved = root / value
    if not resolved.is_file():
        raise MissingMaskFile(f"{path}: mask file not found: {resolved}")
    return resolved


def _positive_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise SchemaError("expected a positive integer", path)
    return value


def parse_manifest(doc, root=".") -> DatasetManifest:
    """Validate a decoded manifest document; mask paths resolve against ``root``."""
    root = Path(root)
    _check_keys(doc, _TOP_KEYS, ("images",), "$")

    camera = None
    if "camera" in doc:
        cam = doc["camera"]
        _check_keys(cam, set(_CAMERA_KEYS), _CAMERA_KEYS, "$.camera")
        for key in _CAMERA_KEYS:
            if not _is_number(cam[key]):
                raise SchemaError("expected a number", f"$.camera.{key}")
        try:
            camera = CameraModel(**{k: cam[k] for k in _CAMERA_KEYS})
        except InvalidCamera as exc:
            raise SchemaError(str(exc), "$.camera") from None

    if "gsd_cm_per_px" in doc:
        g = doc["gsd_cm_per_px"]
        if not _is_number(g) or g <= 0:
            raise SchemaError("expected a positive number", "$.gsd_cm_per_px")
        gsd, explicit = GroundSampleDistance(float(g)), True
    elif camera is not None:
        gsd, explicit = compute_gsd(camera), False
    else:
        raise GsdMissing("manifest has neither gsd_cm_per_px nor a camera block")

    images_doc = doc["images"]
    if not isinstance(images_doc, list):
        raise SchemaError("expected an array", "$.images")
    images = []
    seen = set()
    for i, im in enumerate(images_doc):
        ipath = f"$.images[{i}]"
        _check_keys(im, _IMAGE_KEYS, ("id", "width", "height"), ipath)
        image_id = im["id"]
        if not isinstance(image_id, str) or not image_id:
            raise SchemaError("id must be a non-empty string", f"{ipath}.id")
        if image_id in seen:
            raise SchemaError(f"duplicate image id {image_id!r}", f"{ipath}.id")
        seen.add(image_id)
        width = _positive_int(im["width"], f"{ipath}.width")
        height = _positive_int(im["height"], f"{ipath}.height")

        gts = []
        gt_doc = im.get("ground_truth", [])
        if not isinstance(gt_doc, list):
            raise SchemaError("expected an array", f"{ipath}.ground_truth")
        for j, g in enumerate(gt_doc):
            gpath = f"{ipath}.ground_truth[{j}]"
            _check_keys(g, {"mask_path", "type_code"}, ("mask_path", "type_code"), gpath)
            if not isinstance(g["type_code"], str) or not g["type_code"]:
                raise SchemaError("type_code must be a non-empty string", f"{gpath}.type_code")
            gts.append(GroundTruthEntry(_mask_ref(g["mask_path"], root, f"{gpath}.mask_path"), g["type_code"]))

        dets = []
        det_doc = im.get("detections", [])
        if not isinstance(det_doc, list):
            raise SchemaError("expected an array", f"{ipath}.detections")
        for j, d in enumerate(det_doc):
            dpath = f"{ipath}.detections[{j}]"
            _check_keys(d, {"mask_path", "score"}, ("mask_path", "score"), dpath)
            score = d["score"]
            if not _is_number(score) or not 0 <= score <= 1:
                raise SchemaError("score must be a number in [0, 1]", f"{dpath}.score")
            dets.append(DetectionEntry(_mask_ref(d["mask_path"], root, f"{dpath}.mask_path"), float(score)))

        images.append(ImageEntry(image_id, width, height, tuple(gts), tuple(dets)))

    return DatasetManifest(gsd=gsd, images=tuple(images), camera=camera, explicit_gsd=explicit, root=root)


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "$") from None
    return parse_manifest(doc, root=path.parent)


def load_entry_mask(entry, image: ImageEntry) -> PixelMask:
    """Load the mask of a manifest entry and check it against the image size."""
    mask = load_mask(entry.mask_path)
    if (mask.width, mask.height) != (image.width, image.height):
        raise DimensionMismatch(
            f"{entry.mask_path}: mask is {mask.width}x{mask.height}, "
            f"image {image.id!r} is {image.width}x{image.height}"
        )
    return mask


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(obj))


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def manifest_document(gsd_cm_per_px, images, camera: CameraModel | None = None) -> dict:
    """Build a manifest document; ``images`` are dicts in the on-disk layout."""
    doc = {"gsd_cm_per_px": gsd_cm_per_px, "images": list(images)}
    if camera is not None:
        doc["camera"] = {k: getattr(camera, k) for k in _CAMERA_KEYS}
    if gsd_cm_per_px is None:
        del doc["gsd_cm_per_px"]
    return doc


def relpath(path, start) -> str:
    return Path(os.path.relpath(path, start)).as_posix()

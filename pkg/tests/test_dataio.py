import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from apronid.dataio import (
    RleMask,
    load_manifest,
    load_mask,
    load_mask_png,
    load_mask_rle,
    rle_decode,
    rle_encode,
    save_mask_png,
    save_mask_rle,
)
from apronid.errors import (
    DecodeError,
    GsdMissing,
    MissingMaskFile,
    RunSumMismatch,
    SchemaError,
    UnsupportedPngFlavor,
)
from apronid.geometry import PixelMask
from oracles import random_blob_mask


def write_png(path, arr, mode="L"):
    Image.fromarray(arr, mode=mode).save(path)


def test_png_all_zero(tmp_path):
    write_png(tmp_path / "z.png", np.zeros((4, 3), dtype=np.uint8))
    assert load_mask_png(tmp_path / "z.png").pixel_count == 0


def test_png_all_255(tmp_path):
    write_png(tmp_path / "f.png", np.full((4, 3), 255, dtype=np.uint8))
    mask = load_mask_png(tmp_path / "f.png")
    assert (mask.width, mask.height, mask.pixel_count) == (3, 4, 12)


def test_png_checkerboard(tmp_path):
    arr = np.zeros((4, 4), dtype=np.uint8)
    arr[::2, ::2] = 1
    arr[1::2, 1::2] = 7
    write_png(tmp_path / "c.png", arr)
    mask = load_mask_png(tmp_path / "c.png")
    expected = [(x, y) for y in range(4) for x in range(4) if (x + y) % 2 == 0]
    assert [tuple(p) for p in mask.points().tolist()] == expected


def test_png_rejects_rgb_and_16bit(tmp_path):
    Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8), mode="RGB").save(tmp_path / "rgb.png")
    with pytest.raises(UnsupportedPngFlavor):
        load_mask_png(tmp_path / "rgb.png")
    Image.fromarray(np.zeros((2, 2), dtype=np.uint16)).save(tmp_path / "i16.png")
    with pytest.raises(UnsupportedPngFlavor):
        load_mask_png(tmp_path / "i16.png")


def test_png_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_mask_png(tmp_path / "nope.png")
    (tmp_path / "junk.png").write_bytes(b"not a png")
    with pytest.raises(DecodeError):
        load_mask_png(tmp_path / "junk.png")


def test_rle_examples():
    empty = PixelMask.empty(3, 2)
    assert rle_encode(empty).runs == (6,)
    assert rle_encode(empty).to_text() == "3 2\n6"
    full = PixelMask(np.ones((2, 3)))
    assert rle_encode(full).runs == (0, 6)
    mixed = PixelMask([[0, 1, 1], [1, 0, 0]])
    assert rle_encode(mixed).runs == (1, 3, 2)


def test_rle_sum_mismatch():
    with pytest.raises(RunSumMismatch):
        rle_decode(RleMask(3, 2, (2, 3)))


def test_rle_text_accepts_crlf():
    rle = RleMask.from_text("3 2\r\n1 3 2\r\n")
    assert rle == RleMask(3, 2, (1, 3, 2))
    with pytest.raises(DecodeError):
        RleMask.from_text("3 2\n1 x 2\n")


def test_rle_file_is_lf(tmp_path):
    mask = PixelMask([[0, 1, 1], [1, 0, 0]])
    save_mask_rle(mask, tmp_path / "m.rle")
    assert (tmp_path / "m.rle").read_bytes() == b"3 2\n1 3 2\n"
    assert load_mask_rle(tmp_path / "m.rle") == mask


@settings(max_examples=200, deadline=None)
@given(arrays(bool, st.tuples(st.integers(0, 12), st.integers(0, 12))))
def test_rle_round_trip_property(arr):
    mask = PixelMask(arr)
    rle = rle_encode(mask)
    assert sum(rle.runs) == mask.width * mask.height
    assert rle_decode(rle) == mask
    assert rle_decode(RleMask.from_text(rle.to_text())) == mask


def test_png_and_rle_agree(tmp_path):
    rng = np.random.default_rng(8)
    for k in range(20):
        mask = PixelMask(random_blob_mask(rng))
        save_mask_png(mask, tmp_path / f"{k}.png")
        save_mask_rle(mask, tmp_path / f"{k}.rle")
        assert load_mask(tmp_path / f"{k}.png") == load_mask(tmp_path / f"{k}.rle") == mask


# ---------------------------------------------------------------------------
# manifest


@pytest.fixture
def mask_dir(tmp_path):
    mask = PixelMask(np.pad(np.ones((4, 6), dtype=bool), 2))
    save_mask_png(mask, tmp_path / "gt.png")
    save_mask_rle(mask, tmp_path / "det.rle")
    return tmp_path


def manifest_doc(**overrides):
    doc = {
        "gsd_cm_per_px": 3.13,
        "images": [{
            "id": "img0",
            "width": 10,
            "height": 8,
            "ground_truth": [{"mask_path": "gt.png", "type_code": "CM2"}],
            "detections": [{"mask_path": "det.rle", "score": 0.9}],
        }],
    }
    doc.update(overrides)
    return doc


def write_manifest(dir_, doc):
    path = dir_ / "manifest.json"
    path.write_text(json.dumps(doc))
    return path


def test_minimal_manifest(mask_dir):
    m = load_manifest(write_manifest(mask_dir, manifest_doc()))
    assert m.gsd.cm_per_px == 3.13
    assert [im.id for im in m.images] == ["img0"]
    assert m.images[0].detections[0].score == 0.9
    assert m.images[0].ground_truth[0].mask_path == mask_dir / "gt.png"


def test_manifest_camera_block(mask_dir):
    doc = manifest_doc(camera={"sensor_width_mm": 12.75, "altitude_m": 120,
                               "focal_length_mm": 10.6, "image_width_px": 4608})
    del doc["gsd_cm_per_px"]
    m = load_manifest(write_manifest(mask_dir, doc))
    assert m.gsd.cm_per_px == pytest.approx(3.13, abs=0.005)
    assert not m.explicit_gsd


def test_explicit_gsd_wins(mask_dir):
    doc = manifest_doc(gsd_cm_per_px=5.0, camera={"sensor_width_mm": 12.75, "altitude_m": 120,
                                                  "focal_length_mm": 10.6, "image_width_px": 4608})
    assert load_manifest(write_manifest(mask_dir, doc)).gsd.cm_per_px == 5.0


def test_gsd_missing(mask_dir):
    doc = manifest_doc()
    del doc["gsd_cm_per_px"]
    with pytest.raises(GsdMissing):
        load_manifest(write_manifest(mask_dir, doc))


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d["images"][0]["detections"][0].update(score=-0.1), "$.images[0].detections[0].score"),
    (lambda d: d["images"][0]["detections"][0].update(score=1.5), "$.images[0].detections[0].score"),
    (lambda d: d.update(extra=1), "$"),
    (lambda d: d["images"][0].update(colour="red"), "$.images[0]"),
    (lambda d: d["images"][0].update(width=0), "$.images[0].width"),
    (lambda d: d["images"].append(dict(d["images"][0])), "$.images[1].id"),
    (lambda d: d.update(images={}), "$.images"),
])
def test_schema_errors(mask_dir, mutate, path):
    doc = manifest_doc()
    mutate(doc)
    with pytest.raises(SchemaError) as info:
        load_manifest(write_manifest(mask_dir, doc))
    assert info.value.path == path


def test_missing_mask_file(mask_dir):
    doc = manifest_doc()
    doc["images"][0]["ground_truth"][0]["mask_path"] = "absent.png"
    with pytest.raises(MissingMaskFile):
        load_manifest(write_manifest(mask_dir, doc))


def test_manifest_idempotent(mask_dir):
    path = write_manifest(mask_dir, manifest_doc())
    assert load_manifest(path) == load_manifest(path)

"""Exact integer geometry on pixel grids.

Points are pixel centers: ``x`` is the column and ``y`` the row, rows growing
downward as in raster storage. Hulls are reported in these storage
coordinates but ordered counter-clockwise as seen with y pointing up, starting
at the leftmost vertex (smallest row on ties). Collinear boundary points are
dropped, so consecutive hull vertices always make a strict turn.

All comparisons are done on integers; only :func:`mask_diameter_px` takes a
square root, once, at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from apronid import kernels
from apronid.errors import EmptyMask, EmptyPointSet


class PixelPoint(NamedTuple):
    x: int
    y: int


class PixelMask:
    """Binary foreground raster of one object instance.

    Wraps a read-only ``(height, width)`` boolean array.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        self._data = arr

    @classmethod
    def empty(cls, width: int, height: int) -> "PixelMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def from_points(cls, points: Iterable, width: int, height: int) -> "PixelMask":
        arr = np.zeros((height, width), dtype=bool)
        pts = _as_points(points)
        if len(pts):
            xs, ys = pts[:, 0], pts[:, 1]
            if xs.min() < 0 or ys.min() < 0 or xs.max() >= width or ys.max() >= height:
                raise ValueError(f"point outside {width}x{height} mask")
            arr[ys, xs] = True
        return cls(arr)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    @property
    def pixel_count(self) -> int:
        return int(np.count_nonzero(self._data))

    def points(self) -> np.ndarray:
        """Foreground points as an ``(n, 2)`` int64 array of ``(x, y)``, row-major."""
        ys, xs = np.nonzero(self._data)
        return np.stack([xs, ys], axis=1).astype(np.int64)

    def row_extremes(self) -> np.ndarray:
        """Leftmost and rightmost foreground pixel of every occupied row.

        Every hull vertex of the mask is among these points, so hull and
        diameter computations can start from them without losing exactness.
        """
        occupied = np.flatnonzero(self._data.any(axis=1))
        if occupied.size == 0:
            return np.empty((0, 2), dtype=np.int64)
        rows = self._data[occupied]
        left = rows.argmax(axis=1)
        right = self.width - 1 - rows[:, ::-1].argmax(axis=1)
        pts = np.concatenate(
            [np.stack([left, occupied], axis=1), np.stack([right, occupied], axis=1)]
        ).astype(np.int64)
        return np.unique(pts, axis=0)

    def __eq__(self, other):
        if not isinstance(other, PixelMask):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(
            np.array_equal(self._data, other._data)
        )

    __hash__ = None

    def __repr__(self):
        return f"PixelMask({self.width}x{self.height}, {self.pixel_count} px)"


@dataclass(frozen=True)
class ConvexHull:
    vertices: tuple[PixelPoint, ...]

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


def _as_points(points) -> np.ndarray:
    if isinstance(points, PixelMask):
        return points.points()
    if isinstance(points, np.ndarray):
        arr = points.astype(np.int64, copy=False)
    else:
        arr = np.array([(int(p[0]), int(p[1])) for p in points], dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be (x, y) pairs")
    return arr


def _unique_points(points) -> np.ndarray:
    arr = _as_points(points)
    if len(arr) == 0:
        raise EmptyPointSet("cannot build a hull of zero points")
    return np.unique(arr, axis=0)


def _pick_kernels(arr: np.ndarray, backend):
    mod = kernels.get_backend(backend)
    if mod is not kernels._pure and len(arr) and np.abs(arr).max() >= kernels.COMPILED_COORD_LIMIT:
        mod = kernels._pure
    return mod


def _run_hull(points, algorithm: str, backend=None) -> ConvexHull:
    arr = _unique_points(points)
    mod = _pick_kernels(arr, backend)
    xs = arr[:, 0]
    ys_up = -arr[:, 1]
    if mod is kernels._pure:
        xs, ys_up = xs.tolist(), ys_up.tolist()
    idx = getattr(mod, algorithm)(xs, ys_up)
    return ConvexHull(tuple(PixelPoint(int(arr[i, 0]), int(arr[i, 1])) for i in idx))


def convex_hull_giftwrap(points, backend=None) -> ConvexHull:
    """Convex hull by wrapping counter-clockwise from the leftmost point.

    ``points`` is any iterable of ``(x, y)`` pairs, an ``(n, 2)`` array or a
    :class:`PixelMask`; duplicates are ignored.
    """
    return _run_hull(points, "giftwrap", backend)


def convex_hull_monotone(points, backend=None) -> ConvexHull:
    """Convex hull by Andrew's monotone chain; same output as the giftwrap."""
    return _run_hull(points, "monotone_chain", backend)


convex_hull = convex_hull_giftwrap


def mask_hull(mask: PixelMask, backend=None) -> ConvexHull:
    if mask.pixel_count == 0:
        raise EmptyMask("mask has no foreground pixels")
    return convex_hull_giftwrap(mask.row_extremes(), backend)


def hull_diameter_sq(hull: ConvexHull, backend=None) -> int:
    """Squared farthest vertex distance of a hull (rotating calipers)."""
    arr = np.array(hull.vertices, dtype=np.int64).reshape(-1, 2)
    mod = _pick_kernels(arr, backend)
    xs, ys_up = arr[:, 0], -arr[:, 1]
    if mod is kernels._pure:
        xs, ys_up = xs.tolist(), ys_up.tolist()
    return int(mod.calipers_sq(xs, ys_up))


def mask_diameter_sq(mask: PixelMask, backend=None) -> int:
    return hull_diameter_sq(mask_hull(mask, backend), backend)


def mask_diameter_px(mask: PixelMask, backend=None) -> float:
    """Largest center-to-center distance between two foreground pixels."""
    return math.sqrt(mask_diameter_sq(mask, backend))


def pixel_count(mask: PixelMask) -> int:
    return mask.pixel_count


def brute_force_diameter_sq(points, chunk: int = 2048) -> int:
    """All-pairs maximum squared distance, ``O(n^2)``; used as an oracle."""
    arr = _as_points(points)
    if len(arr) == 0:
        raise EmptyPointSet("no points")
    best = 0
    for start in range(0, len(arr), chunk):
        block = arr[start:start + chunk]
        dx = block[:, None, 0] - arr[None, :, 0]
        dy = block[:, None, 1] - arr[None, :, 1]
        best = max(best, int((dx * dx + dy * dy).max()))
    return best

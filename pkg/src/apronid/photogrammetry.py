"""Ground sample distance and pixel-to-ground conversions."""
from __future__ import annotations

from dataclasses import dataclass

from apronid.errors import InvalidCamera


@dataclass(frozen=True)
class CameraModel:
    """Nadir camera geometry.

    ``image_width_px`` is the image width in pixels (4608 for the
    12.75 mm / 10.6 mm sensor used at 120 m, which gives 3.13 cm/px).
    """

    sensor_width_mm: float
    altitude_m: float
    focal_length_mm: float
    image_width_px: int

    def __post_init__(self):
        for name in ("sensor_width_mm", "altitude_m", "focal_length_mm", "image_width_px"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidCamera(f"{name} must be a number, got {value!r}")
            if not value > 0:
                raise InvalidCamera(f"{name} must be positive, got {value!r}")
        if int(self.image_width_px) != self.image_width_px:
            raise InvalidCamera(f"image_width_px must be an integer, got {self.image_width_px!r}")


@dataclass(frozen=True)
class GroundSampleDistance:
    cm_per_px: float

    def __post_init__(self):
        if not self.cm_per_px > 0:
            raise InvalidCamera(f"GSD must be positive, got {self.cm_per_px!r}")

    @property
    def m_per_px(self) -> float:
        return self.cm_per_px / 100.0

    def __str__(self):
        return f"{self.cm_per_px:.2f} cm/px"


def compute_gsd(camera: CameraModel) -> GroundSampleDistance:
    """cm/px = sensor width [mm] * altitude [m] * 100 / (focal length [mm] * image width [px])."""
    return GroundSampleDistance(
        camera.sensor_width_mm * camera.altitude_m * 100.0
        / (camera.focal_length_mm * camera.image_width_px)
    )


def surface_area_m2(pixel_count: int, gsd: GroundSampleDistance) -> float:
    # each pixel covers a square of side m_per_px
    return pixel_count * gsd.m_per_px ** 2


def length_m(diameter_px: float, gsd: GroundSampleDistance) -> float:
    if diameter_px < 0:
        raise ValueError(f"diameter must be non-negative, got {diameter_px}")
    return diameter_px * gsd.m_per_px

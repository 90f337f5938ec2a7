"""Ideal aligned pinhole stereo geometry.

Conventions: integer pixel ``(i, j)`` has its center at continuous coordinate
``(i, j)``, so an image of width ``W`` spans ``[-0.5, W - 0.5)``.  The rig
frame has its origin midway between the two camera centers, ``x`` to the
right, ``y`` down and ``z`` along the shared optical axis.  The left camera
sits at ``x = -b/2`` and the right one at ``x = +b/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

Pixel = Tuple[float, float]


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class PointBehindCameraError(GeometryError):
    pass


class NonPositiveDisparityError(GeometryError):
    pass


class TargetTooCloseError(GeometryError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    image_width: int
    image_height: int
    fov_horizontal: float  # radians
    principal_point: Optional[Pixel] = None

    def __post_init__(self) -> None:
        if int(self.image_width) != self.image_width or self.image_width <= 0:
            raise GeometryError(f"image_width must be a positive integer, got {self.image_width}")
        if int(self.image_height) != self.image_height or self.image_height <= 0:
            raise GeometryError(f"image_height must be a positive integer, got {self.image_height}")
        if not 0.0 < self.fov_horizontal < math.pi:
            raise GeometryError(f"fov_horizontal must lie in (0, pi), got {self.fov_horizontal}")
        if self.principal_point is None:
            center = (self.image_width / 2 - 0.5, self.image_height / 2 - 0.5)
            object.__setattr__(self, "principal_point", center)
        else:
            u0, v0 = self.principal_point
            object.__setattr__(self, "principal_point", (float(u0), float(v0)))

    @classmethod
    def from_degrees(cls, image_width: int, image_height: int, fov_deg: float,
                     principal_point: Optional[Pixel] = None) -> "CameraIntrinsics":
        return cls(image_width, image_height, math.radians(fov_deg), principal_point)

    @classmethod
    def from_focal_length(cls, image_width: int, image_height: int, focal_px: float,
                          principal_point: Optional[Pixel] = None) -> "CameraIntrinsics":
        """Build intrinsics whose horizontal FOV reproduces ``focal_px`` exactly."""
        if focal_px <= 0:
            raise GeometryError(f"focal length must be positive, got {focal_px}")
        fov = 2.0 * math.atan((image_width / 2) / focal_px)
        return cls(image_width, image_height, fov, principal_point)

    @property
    def focal_length(self) -> float:
        return focal_length_pixels(self)

    def contains(self, u: float, v: float) -> bool:
        return -0.5 <= u < self.image_width - 0.5 and -0.5 <= v < self.image_height - 0.5


@dataclass(frozen=True)
class StereoRig:
    intrinsics: CameraIntrinsics
    baseline: float  # meters

    def __post_init__(self) -> None:
        if not self.baseline > 0:
            raise GeometryError(f"baseline must be positive, got {self.baseline}")

    @property
    def focal_length(self) -> float:
        return focal_length_pixels(self.intrinsics)

    @property
    def fb(self) -> float:
        """Product of focal length (px) and baseline (m)."""
        return self.focal_length * self.baseline

    def camera_x(self, camera: str) -> float:
        if camera == "left":
            return -self.baseline / 2
        if camera == "right":
            return self.baseline / 2
        raise ValueError(f"unknown camera {camera!r}")


@dataclass(frozen=True)
class DepthInterval:
    nearest: float
    estimate: float
    farthest: float  # math.inf when the far bound diverges

    def __post_init__(self) -> None:
        if not self.nearest > 0:
            raise GeometryError(f"nearest bound must be positive, got {self.nearest}")
        if not self.nearest <= self.estimate <= self.farthest:
            raise GeometryError(
                f"interval out of order: {self.nearest} <= {self.estimate} <= {self.farthest}"
            )

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.farthest)

    @property
    def width(self) -> float:
        return self.farthest - self.nearest

    def __contains__(self, z: float) -> bool:
        return self.nearest <= z <= self.farthest


def focal_length_pixels(intrinsics: CameraIntrinsics) -> float:
    """Focal length in pixels from image width and horizontal FOV."""
    return (intrinsics.image_width / 2) / math.tan(intrinsics.fov_horizontal / 2)


def project_point(rig: StereoRig, point: Sequence[float]) -> Tuple[Optional[Pixel], Optional[Pixel]]:
    """Project a rig-frame point into both cameras.

    Returns ``(left_uv, right_uv)``; a view is ``None`` when the projection
    falls outside that camera's image.
    """
    x, y, z = (float(c) for c in point)
    if not z > 0:
        raise PointBehindCameraError(f"point depth must be positive, got z={z}")
    f = rig.focal_length
    u0, v0 = rig.intrinsics.principal_point
    v = v0 + f * y / z
    views = []
    for camera in ("left", "right"):
        u = u0 + f * (x - rig.camera_x(camera)) / z
        views.append((u, v) if rig.intrinsics.contains(u, v) else None)
    return views[0], views[1]


def disparity_for_distance(rig: StereoRig, z_t: float) -> float:
    if not z_t > 0:
        raise GeometryError(f"distance must be positive, got {z_t}")
    return rig.fb / z_t


def depth_from_disparity(rig: StereoRig, d: float) -> float:
    if not d > 0:
        raise NonPositiveDisparityError(f"disparity must be positive, got {d}")
    return rig.fb / d


def interval_from_disparity(rig: StereoRig, d: float) -> DepthInterval:
    """Depth interval for a measured disparity under a +-1 px error model."""
    z = depth_from_disparity(rig, d)
    far = rig.fb / (d - 1.0) if d > 1.0 else math.inf
    return DepthInterval(rig.fb / (d + 1.0), z, far)


def depth_bounds(rig: StereoRig, z_t: float) -> DepthInterval:
    """Nearest/farthest estimates a +-1 px disparity error produces at ``z_t``."""
    if not z_t > 0:
        raise GeometryError(f"distance must be positive, got {z_t}")
    fb = rig.fb
    nearest = fb * z_t / (fb + z_t)
    farthest = fb * z_t / (fb - z_t) if fb > z_t else math.inf
    return DepthInterval(nearest, z_t, farthest)


def max_baseline(intrinsics: CameraIntrinsics, z_m: float, w_o: float) -> float:
    """Largest baseline keeping a ``w_o``-wide target at ``z_m`` inside both FOVs."""
    half_tan = math.tan(intrinsics.fov_horizontal / 2)
    min_distance = (w_o / 2) / half_tan
    if z_m < min_distance:
        raise TargetTooCloseError(
            f"a {w_o} m target needs z >= {min_distance:.4f} m to fit one FOV, got {z_m}"
        )
    return 2.0 * half_tan * (z_m - min_distance)

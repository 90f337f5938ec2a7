"""Synthetic stereo thermal scenes.

Heat elements are discs facing the rig.  Each pixel's temperature is the
area-weighted mix of element and ambient temperatures over its footprint,
estimated on a regular supersampling grid, which reproduces the dilution a
low-resolution sensor shows for small or distant hot objects.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Mapping, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from .config import ConfigError, _check_keys, rig_from_dict, rig_to_dict
from .geometry import StereoRig
from .thermal import CAMERAS, ThermalFrame

Vec3 = Tuple[float, float, float]
IDENTITY = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

TRUTH_COLUMNS = ("t", "element_id", "x", "y", "z", "temperature")


@dataclass(frozen=True)
class HeatElement:
    position: Vec3  # world frame, meters (equals rig frame for the default pose)
    radius: float
    temperature: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        if len(self.position) != 3:
            raise ValueError("element position must have three coordinates")
        if not self.radius > 0:
            raise ValueError(f"element radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class SceneConfig:
    rig: StereoRig
    elements: Tuple[HeatElement, ...] = ()
    ambient: float = 20.0
    frame_rate: float = 8.0  # Hz, per camera
    phase_offset: float = 0.0  # right camera lag, seconds
    temperature_noise_std: float = 0.0
    centroid_jitter_std: float = 0.0  # pixels
    duration: float = 20.0
    rng_seed: int = 0
    supersample: int = 8
    # world -> rig transform: p_rig = rotation @ (p_world - position)
    rig_position: Vec3 = (0.0, 0.0, 0.0)
    rig_rotation: Tuple[Vec3, Vec3, Vec3] = IDENTITY

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.frame_rate > 0:
            raise ValueError("frame_rate must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.temperature_noise_std < 0 or self.centroid_jitter_std < 0:
            raise ValueError("noise standard deviations must be >= 0")
        if self.supersample < 1:
            raise ValueError("supersample must be >= 1")
        rot = np.asarray(self.rig_rotation, dtype=float)
        if rot.shape != (3, 3) or not np.allclose(rot @ rot.T, np.eye(3), atol=1e-9):
            raise ValueError("rig_rotation must be a 3x3 rotation matrix")
        for el in self.elements:
            if not el.temperature > self.ambient:
                raise ValueError(f"element temperature {el.temperature} must exceed ambient {self.ambient}")

    def to_rig(self, point: Sequence[float]) -> np.ndarray:
        rot = np.asarray(self.rig_rotation, dtype=float)
        return rot @ (np.asarray(point, dtype=float) - np.asarray(self.rig_position, dtype=float))

    def frame_times(self, camera: str) -> List[float]:
        offset = self.phase_offset if camera == "right" else 0.0
        times = []
        k = 0
        while True:
            t = k / self.frame_rate + offset
            if t >= self.duration:
                return times
            times.append(t)
            k += 1


def _frame_rng(scene: SceneConfig, camera: str, frame_index: int) -> np.random.Generator:
    return np.random.default_rng([scene.rng_seed, CAMERAS.index(camera), frame_index])


def render_frame(scene: SceneConfig, camera: str, t: float, frame_index: Optional[int] = None) -> ThermalFrame:
    """Render one camera's view of a static scene at time ``t``.

    Nearer elements occlude farther ones per sample point.  Noise draws come
    from a generator seeded by ``(rng_seed, camera, frame_index)``; when
    ``frame_index`` is omitted it is recovered from ``t`` and the frame rate.
    """
    if camera not in CAMERAS:
        raise ValueError(f"unknown camera {camera!r}")
    if frame_index is None:
        offset = scene.phase_offset if camera == "right" else 0.0
        frame_index = int(round((t - offset) * scene.frame_rate))
    rng = _frame_rng(scene, camera, frame_index)
    intr = scene.rig.intrinsics
    width, height, s = intr.image_width, intr.image_height, scene.supersample
    f = scene.rig.focal_length
    u0, v0 = intr.principal_point
    cam_x = scene.rig.camera_x(camera)

    su = (np.arange(width * s) + 0.5) / s - 0.5
    sv = (np.arange(height * s) + 0.5) / s - 0.5
    temps = np.full((height * s, width * s), float(scene.ambient))
    depth = np.full((height * s, width * s), np.inf)

    jitter = rng.normal(0.0, scene.centroid_jitter_std, size=(len(scene.elements), 2)) \
        if scene.centroid_jitter_std > 0 else np.zeros((len(scene.elements), 2))
    for el, (ju, jv) in zip(scene.elements, jitter):
        x, y, z = scene.to_rig(el.position)
        if z <= 0:
            continue
        uc = u0 + f * (x - cam_x) / z + ju
        vc = v0 + f * y / z + jv
        r = f * el.radius / z
        cols = (su > uc - r) & (su < uc + r)
        rows = (sv > vc - r) & (sv < vc + r)
        if not cols.any() or not rows.any():
            continue
        ci, ri = np.nonzero(cols)[0], np.nonzero(rows)[0]
        c0, c1, r0, r1 = ci[0], ci[-1] + 1, ri[0], ri[-1] + 1
        du = su[c0:c1][None, :] - uc
        dv = sv[r0:r1][:, None] - vc
        inside = (du * du + dv * dv < r * r) & (z < depth[r0:r1, c0:c1])
        temps[r0:r1, c0:c1][inside] = el.temperature
        depth[r0:r1, c0:c1][inside] = z

    grid = temps.reshape(height, s, width, s).mean(axis=(1, 3))
    if scene.temperature_noise_std > 0:
        grid = grid + rng.normal(0.0, scene.temperature_noise_std, size=grid.shape)
    return ThermalFrame(camera, t, grid)


def generate_streams(scene: SceneConfig) -> Tuple[List[ThermalFrame], List[ThermalFrame]]:
    """Render every frame of both cameras at their own timestamps."""
    streams = []
    for camera in CAMERAS:
        streams.append([render_frame(scene, camera, t, k) for k, t in enumerate(scene.frame_times(camera))])
    return streams[0], streams[1]


def ground_truth(scene: SceneConfig) -> List[Tuple[float, int, float, float, float, float]]:
    """Rig-frame element positions at every left-camera timestamp."""
    rows = []
    for t in scene.frame_times("left"):
        for i, el in enumerate(scene.elements):
            x, y, z = scene.to_rig(el.position)
            rows.append((t, i, float(x), float(y), float(z), el.temperature))
    return rows


def write_ground_truth(fh: TextIO, scene: SceneConfig) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRUTH_COLUMNS)
    for t, i, x, y, z, temp in ground_truth(scene):
        writer.writerow([f"{t:.6f}", i, f"{x:.6f}", f"{y:.6f}", f"{z:.6f}", f"{temp:.6f}"])


_SCENE_KEYS = {
    "rig", "elements", "ambient", "frame_rate", "phase_offset", "temperature_noise_std",
    "centroid_jitter_std", "duration", "rng_seed", "supersample", "rig_pose",
}


def scene_from_dict(doc: Mapping[str, Any]) -> SceneConfig:
    _check_keys(doc, _SCENE_KEYS, "scene")
    try:
        elements = []
        for i, el in enumerate(doc.get("elements", [])):
            _check_keys(el, {"position", "radius", "temperature"}, f"elements[{i}]")
            elements.append(HeatElement(tuple(el["position"]), float(el["radius"]), float(el["temperature"])))
        kwargs: dict = {"rig": rig_from_dict(doc.get("rig")), "elements": tuple(elements)}
        for key in ("ambient", "frame_rate", "phase_offset", "temperature_noise_std",
                    "centroid_jitter_std", "duration"):
            if key in doc:
                kwargs[key] = float(doc[key])
        for key in ("rng_seed", "supersample"):
            if key in doc:
                kwargs[key] = int(doc[key])
        pose = doc.get("rig_pose")
        if pose is not None:
            _check_keys(pose, {"position", "rotation"}, "rig_pose")
            if "position" in pose:
                kwargs["rig_position"] = tuple(float(c) for c in pose["position"])
            if "rotation" in pose:
                kwargs["rig_rotation"] = tuple(tuple(float(c) for c in row) for row in pose["rotation"])
        return SceneConfig(**kwargs)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scene: {exc}") from None


def scene_to_dict(scene: SceneConfig) -> dict:
    return {
        "rig": rig_to_dict(scene.rig),
        "elements": [
            {"position": list(el.position), "radius": el.radius, "temperature": el.temperature}
            for el in scene.elements
        ],
        "ambient": scene.ambient,
        "frame_rate": scene.frame_rate,
        "phase_offset": scene.phase_offset,
        "temperature_noise_std": scene.temperature_noise_std,
        "centroid_jitter_std": scene.centroid_jitter_std,
        "duration": scene.duration,
        "rng_seed": scene.rng_seed,
        "supersample": scene.supersample,
        "rig_pose": {"position": list(scene.rig_position), "rotation": [list(r) for r in scene.rig_rotation]},
    }


def load_scene(path: Union[str, Path]) -> SceneConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return scene_from_dict(doc)

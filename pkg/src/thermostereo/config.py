"""JSON configuration for the pipeline.  Degrees are accepted here and nowhere else."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .geometry import CameraIntrinsics, StereoRig
from .localization import DEFAULT_GATE_RADIUS, DEFAULT_MAX_GAP, DEFAULT_WINDOW
from .matcher import DEFAULT_MAX_POINTS, DEFAULT_MAX_TEMP_DELTA
from .thermal import TemperatureBand


class ConfigError(ValueError):
    pass


DEFAULT_RIG = {"image_width": 32, "image_height": 32, "fov_deg": 33.0, "baseline": 0.2}


def _check_keys(doc: Mapping[str, Any], allowed: set, where: str) -> None:
    if not isinstance(doc, Mapping):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def rig_from_dict(doc: Optional[Mapping[str, Any]] = None) -> StereoRig:
    doc = dict(DEFAULT_RIG, **(doc or {}))
    _check_keys(doc, {"image_width", "image_height", "fov_deg", "baseline", "principal_point"}, "rig")
    pp = doc.get("principal_point")
    try:
        intr = CameraIntrinsics.from_degrees(
            doc["image_width"], doc["image_height"], float(doc["fov_deg"]),
            tuple(pp) if pp is not None else None,
        )
        return StereoRig(intr, float(doc["baseline"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid rig: {exc}") from None


def rig_to_dict(rig: StereoRig) -> dict:
    intr = rig.intrinsics
    return {
        "image_width": intr.image_width,
        "image_height": intr.image_height,
        "fov_deg": math.degrees(intr.fov_horizontal),
        "baseline": rig.baseline,
        "principal_point": list(intr.principal_point),
    }


@dataclass(frozen=True)
class PipelineConfig:
    rig: StereoRig = field(default_factory=rig_from_dict)
    band: TemperatureBand = field(default_factory=TemperatureBand)
    min_blob_pixels: int = 1
    weighted_centroid: bool = True
    max_skew: float = 0.1
    max_temp_delta: float = DEFAULT_MAX_TEMP_DELTA
    max_vertical_disparity: Optional[float] = None
    max_points: int = DEFAULT_MAX_POINTS
    gate_radius: float = DEFAULT_GATE_RADIUS
    max_gap: float = DEFAULT_MAX_GAP
    stats_window: float = DEFAULT_WINDOW
    out_estimates: Optional[str] = None
    out_stats: Optional[str] = None

    def __post_init__(self) -> None:
        if self.min_blob_pixels < 1:
            raise ConfigError("min_blob_pixels must be >= 1")
        if self.max_skew < 0:
            raise ConfigError("max_skew must be >= 0")
        if self.max_temp_delta < 0:
            raise ConfigError("max_temp_delta must be >= 0")
        if self.max_vertical_disparity is not None and self.max_vertical_disparity < 0:
            raise ConfigError("max_vertical_disparity must be >= 0")
        if self.max_points < 1:
            raise ConfigError("max_points must be >= 1")
        if self.gate_radius <= 0 or self.max_gap < 0:
            raise ConfigError("gate_radius must be > 0 and max_gap >= 0")
        if self.stats_window <= 0:
            raise ConfigError("stats_window must be > 0")


_SCALARS = {
    "min_blob_pixels": int,
    "weighted_centroid": bool,
    "max_skew": float,
    "max_temp_delta": float,
    "max_vertical_disparity": float,
    "max_points": int,
    "gate_radius": float,
    "max_gap": float,
    "stats_window": float,
    "out_estimates": str,
    "out_stats": str,
}


def config_from_dict(doc: Mapping[str, Any]) -> PipelineConfig:
    _check_keys(doc, set(_SCALARS) | {"rig", "band"}, "config")
    kwargs: dict = {"rig": rig_from_dict(doc.get("rig"))}
    band = doc.get("band")
    if band is not None:
        _check_keys(band, {"low", "high", "background_sentinel"}, "band")
        try:
            kwargs["band"] = TemperatureBand(**{k: float(v) for k, v in band.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid band: {exc}") from None
    for key, kind in _SCALARS.items():
        if key in doc and doc[key] is not None:
            value = doc[key]
            if kind is bool and not isinstance(value, bool):
                raise ConfigError(f"{key} must be true or false")
            try:
                kwargs[key] = kind(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{key}: cannot interpret {value!r}") from None
    return PipelineConfig(**kwargs)


def load_config(path: Union[str, Path, None]) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return config_from_dict(doc)

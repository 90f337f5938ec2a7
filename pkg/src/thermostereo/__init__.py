"""Stereo thermal perception for low-resolution IR camera pairs."""

from .geometry import (
    CameraIntrinsics,
    DepthInterval,
    StereoRig,
    depth_bounds,
    depth_from_disparity,
    disparity_for_distance,
    focal_length_pixels,
    max_baseline,
    project_point,
)
from .localization import TargetEstimate, WindowStats, accumulate_stats, estimate_target, label_targets
from .matcher import Correspondence, MatchResult, PointSet, match
from .thermal import HeatPoint, TemperatureBand, ThermalFrame, detect_blobs, filter_frame, intensity_to_temperature

__version__ = "0.1.0"

__all__ = [
    "CameraIntrinsics",
    "Correspondence",
    "DepthInterval",
    "HeatPoint",
    "MatchResult",
    "PointSet",
    "StereoRig",
    "TargetEstimate",
    "TemperatureBand",
    "ThermalFrame",
    "WindowStats",
    "accumulate_stats",
    "depth_bounds",
    "depth_from_disparity",
    "detect_blobs",
    "disparity_for_distance",
    "estimate_target",
    "filter_frame",
    "focal_length_pixels",
    "intensity_to_temperature",
    "label_targets",
    "match",
    "max_baseline",
    "project_point",
]

"""Frame pairs in, labeled 3D target estimates and window statistics out."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence

from .config import ConfigError, PipelineConfig
from .localization import LabeledEstimate, TargetEstimate, TargetLabeler, WindowStats, accumulate_stats, estimate_target
from .matcher import TooManyPointsError, match
from .thermal import FramePair, ThermalFrame, detect_blobs, pair_streams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineOutput:
    estimates: List[LabeledEstimate]
    stats: List[WindowStats]
    pairs_processed: int


def check_frame(frame: ThermalFrame, config: PipelineConfig) -> None:
    intr = config.rig.intrinsics
    if (frame.width, frame.height) != (intr.image_width, intr.image_height):
        raise ConfigError(
            f"{frame.camera_id} frame at t={frame.timestamp} is {frame.width}x{frame.height}, "
            f"rig expects {intr.image_width}x{intr.image_height}"
        )


def process_pair(pair: FramePair, config: PipelineConfig) -> List[TargetEstimate]:
    """Detect, match and localize the heat sources visible in one frame pair."""
    blobs = []
    for frame in (pair.left, pair.right):
        check_frame(frame, config)
        blobs.append(detect_blobs(frame, config.band, config.min_blob_pixels, config.weighted_centroid))
    try:
        result = match(blobs[0], blobs[1], config.max_temp_delta, config.max_vertical_disparity, config.max_points)
    except TooManyPointsError as exc:
        log.warning("skipping pair at t=%.3f: %s", pair.timestamp, exc)
        return []
    estimates = []
    for corr in result.pairs:
        if corr.disparity <= 0:
            log.debug("dropping pair with non-positive disparity %.3f at t=%.3f", corr.disparity, pair.timestamp)
            continue
        estimates.append(estimate_target(config.rig, corr, pair.timestamp))
    return estimates


def run_pipeline(
    left: Sequence[ThermalFrame], right: Sequence[ThermalFrame], config: PipelineConfig
) -> PipelineOutput:
    for frame in list(left) + list(right):
        check_frame(frame, config)
    labeler = TargetLabeler(config.gate_radius, config.max_gap)
    labeled: List[LabeledEstimate] = []
    n = 0
    for pair in pair_streams(left, right, config.max_skew):
        n += 1
        estimates = process_pair(pair, config)
        for label, est in zip(labeler.update(estimates, pair.timestamp), estimates):
            labeled.append(LabeledEstimate(label, est))
    log.info("processed %d frame pairs, %d estimates", n, len(labeled))
    return PipelineOutput(labeled, accumulate_stats(labeled, config.stats_window), n)

"""Turn correspondences into 3D target estimates and aggregate them over time."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .geometry import DepthInterval, NonPositiveDisparityError, StereoRig, interval_from_disparity
from .matcher import Correspondence

DEFAULT_GATE_RADIUS = 0.3
DEFAULT_MAX_GAP = 1.0
DEFAULT_WINDOW = 20.0

ESTIMATE_COLUMNS = ("t", "label", "x", "y", "z", "z_min", "z_max", "disparity_px", "temp_c")
STATS_COLUMNS = ("label", "window_start", "count", "mean_z", "std_z")


@dataclass(frozen=True)
class TargetEstimate:
    position: Tuple[float, float, float]  # rig frame, meters
    depth_interval: DepthInterval
    mean_temperature: float
    disparity: float
    timestamp: float = 0.0

    @property
    def z(self) -> float:
        return self.position[2]


@dataclass(frozen=True)
class LabeledEstimate:
    label: int
    estimate: TargetEstimate

    @property
    def timestamp(self) -> float:
        return self.estimate.timestamp


@dataclass(frozen=True)
class WindowStats:
    target_label: int
    window_start: float
    count: int
    mean_distance: float
    std_distance: float
    window: float


def estimate_target(rig: StereoRig, pair: Correspondence, timestamp: float = 0.0) -> TargetEstimate:
    """Back-project a matched pair through the rig center.

    Depth comes from the horizontal disparity; the lateral coordinates from
    the mean image position of the two views.  The depth interval applies the
    +-1 px disparity error to the measured disparity.
    """
    d = pair.disparity
    if not d > 0:
        raise NonPositiveDisparityError(f"degenerate correspondence with disparity {d}")
    f = rig.focal_length
    u0, v0 = rig.intrinsics.principal_point
    interval = interval_from_disparity(rig, d)
    z = interval.estimate
    u_mid = (pair.left.u + pair.right.u) / 2
    v_mid = (pair.left.v + pair.right.v) / 2
    position = (z * (u_mid - u0) / f, z * (v_mid - v0) / f, z)
    temperature = (pair.left.mean_temperature + pair.right.mean_temperature) / 2
    return TargetEstimate(position, interval, temperature, d, timestamp)


class TargetLabeler:
    """Nearest-neighbour association of estimates across consecutive frames.

    A track can be continued while it was last seen at most ``max_gap``
    seconds ago; estimates farther than ``gate_radius`` from every live track
    start a new label.  Assignment is greedy by distance, ties broken by
    label then input position, so results are deterministic.
    """

    def __init__(self, gate_radius: float = DEFAULT_GATE_RADIUS, max_gap: float = DEFAULT_MAX_GAP):
        self.gate_radius = gate_radius
        self.max_gap = max_gap
        self._tracks: Dict[int, Tuple[np.ndarray, float]] = {}
        self._next_label = 0

    def update(self, estimates: Sequence[TargetEstimate], timestamp: Optional[float] = None) -> List[int]:
        if timestamp is None:
            timestamp = estimates[0].timestamp if estimates else None
        if timestamp is not None:
            self._expire(timestamp)
        candidates = []
        for label, (pos, _) in self._tracks.items():
            for i, est in enumerate(estimates):
                dist = float(np.linalg.norm(np.asarray(est.position) - pos))
                if dist <= self.gate_radius:
                    candidates.append((dist, label, i))
        candidates.sort()
        labels: List[Optional[int]] = [None] * len(estimates)
        taken = set()
        for _, label, i in candidates:
            if labels[i] is None and label not in taken:
                labels[i] = label
                taken.add(label)
        for i, est in enumerate(estimates):
            if labels[i] is None:
                labels[i] = self._next_label
                self._next_label += 1
            self._tracks[labels[i]] = (np.asarray(est.position, dtype=float), est.timestamp)
        return labels  # type: ignore[return-value]

    def _expire(self, now: float) -> None:
        stale = [lab for lab, (_, t) in self._tracks.items() if now - t > self.max_gap]
        for lab in stale:
            del self._tracks[lab]


def label_targets(
    frames: Iterable[Sequence[TargetEstimate]],
    gate_radius: float = DEFAULT_GATE_RADIUS,
    max_gap: float = DEFAULT_MAX_GAP,
) -> List[LabeledEstimate]:
    labeler = TargetLabeler(gate_radius, max_gap)
    out = []
    for estimates in frames:
        for label, est in zip(labeler.update(estimates), estimates):
            out.append(LabeledEstimate(label, est))
    return out


def accumulate_stats(estimates: Iterable[LabeledEstimate], window: float = DEFAULT_WINDOW) -> List[WindowStats]:
    """Per-label mean and sample std of depth over fixed windows.

    Windows are aligned to multiples of ``window`` seconds, so stats of
    concatenated recordings split cleanly at window boundaries.
    """
    if not window > 0:
        raise ValueError(f"window must be positive, got {window}")
    groups: Dict[Tuple[int, int], List[float]] = {}
    for item in estimates:
        key = (item.label, math.floor(item.timestamp / window))
        groups.setdefault(key, []).append(item.estimate.z)
    stats = []
    for (label, slot), zs in sorted(groups.items()):
        arr = np.asarray(zs, dtype=float)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        stats.append(WindowStats(label, slot * window, int(arr.size), float(arr.mean()), std, window))
    return stats


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6f}"


def write_estimates_csv(fh: TextIO, estimates: Iterable[LabeledEstimate]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ESTIMATE_COLUMNS)
    for item in estimates:
        e = item.estimate
        x, y, z = e.position
        writer.writerow([
            _fmt(e.timestamp), item.label, _fmt(x), _fmt(y), _fmt(z),
            _fmt(e.depth_interval.nearest), _fmt(e.depth_interval.farthest),
            _fmt(e.disparity), _fmt(e.mean_temperature),
        ])


def write_stats_csv(fh: TextIO, stats: Iterable[WindowStats]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(STATS_COLUMNS)
    for s in stats:
        writer.writerow([s.target_label, _fmt(s.window_start), s.count, _fmt(s.mean_distance), _fmt(s.std_distance)])

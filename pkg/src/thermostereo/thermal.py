"""Thermal frames: radiometry, band filtering, blob extraction and stereo frame pairing."""

from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, TextIO, Tuple, Union

import numpy as np
from scipy import ndimage

STEFAN_BOLTZMANN = 5.670374419e-8  # W m^-2 K^-4
KELVIN_OFFSET = 273.15
DEFAULT_EMISSIVITY = 0.95

CAMERAS = ("left", "right")

# 8-connectivity
_CONNECTIVITY = np.ones((3, 3), dtype=bool)


class RadianceError(ValueError):
    pass


class FrameFormatError(ValueError):
    """A frame document could not be parsed.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


@dataclass(frozen=True, eq=False)
class ThermalFrame:
    camera_id: str
    timestamp: float
    temperatures: np.ndarray  # (H, W) degrees Celsius, row-major

    def __post_init__(self) -> None:
        if self.camera_id not in CAMERAS:
            raise ValueError(f"camera_id must be 'left' or 'right', got {self.camera_id!r}")
        grid = np.asarray(self.temperatures, dtype=np.float64)
        if grid.ndim != 2:
            raise ValueError(f"temperature grid must be 2-D, got shape {grid.shape}")
        if not np.all(np.isfinite(grid)):
            raise ValueError("temperature grid contains non-finite values")
        grid.setflags(write=False)
        object.__setattr__(self, "temperatures", grid)
        object.__setattr__(self, "timestamp", float(self.timestamp))

    @property
    def height(self) -> int:
        return self.temperatures.shape[0]

    @property
    def width(self) -> int:
        return self.temperatures.shape[1]

    def with_temperatures(self, grid: np.ndarray) -> "ThermalFrame":
        return ThermalFrame(self.camera_id, self.timestamp, grid)


@dataclass(frozen=True)
class TemperatureBand:
    low: float = 125.0
    high: float = 550.0
    background_sentinel: float = -KELVIN_OFFSET

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise ValueError(f"band requires low < high, got [{self.low}, {self.high}]")
        if not self.background_sentinel < self.low:
            raise ValueError("background_sentinel must lie below the band")


@dataclass(frozen=True)
class HeatPoint:
    centroid: Tuple[float, float]  # (u, v) pixels
    mean_temperature: float
    pixel_count: int = 1
    camera_id: str = "left"

    @property
    def u(self) -> float:
        return self.centroid[0]

    @property
    def v(self) -> float:
        return self.centroid[1]


@dataclass(frozen=True)
class FramePair:
    left: ThermalFrame
    right: ThermalFrame

    def __post_init__(self) -> None:
        if self.left.camera_id != "left" or self.right.camera_id != "right":
            raise ValueError("frame pair must be (left, right)")

    @property
    def skew(self) -> float:
        return abs(self.left.timestamp - self.right.timestamp)

    @property
    def timestamp(self) -> float:
        return self.left.timestamp


# --------------------------------------------------------------------------
# radiometry


def temperature_to_intensity(celsius: float, emissivity: float = DEFAULT_EMISSIVITY) -> float:
    """Radiant exitance of a grey body at ``celsius``."""
    return emissivity * STEFAN_BOLTZMANN * (celsius + KELVIN_OFFSET) ** 4


def intensity_to_temperature(intensity: float, emissivity: float = DEFAULT_EMISSIVITY) -> float:
    """Invert the Stefan-Boltzmann law; returns degrees Celsius."""
    if not intensity > 0:
        raise RadianceError(f"radiant intensity must be positive, got {intensity}")
    if not 0.0 < emissivity <= 1.0:
        raise RadianceError(f"emissivity must lie in (0, 1], got {emissivity}")
    return (intensity / (emissivity * STEFAN_BOLTZMANN)) ** 0.25 - KELVIN_OFFSET


# --------------------------------------------------------------------------
# segmentation


def filter_frame(frame: ThermalFrame, band: TemperatureBand) -> ThermalFrame:
    """Replace every pixel outside the closed band with the background sentinel."""
    grid = frame.temperatures
    in_band = (grid >= band.low) & (grid <= band.high)
    return frame.with_temperatures(np.where(in_band, grid, band.background_sentinel))


def detect_blobs(
    frame: ThermalFrame,
    band: TemperatureBand,
    min_blob_pixels: int = 1,
    weighted: bool = True,
) -> List[HeatPoint]:
    """Extract 8-connected in-band blobs as heat points.

    With ``weighted`` the centroid uses weights ``T - band.low + 1`` (always
    positive in-band); otherwise every member pixel counts equally.  Output is
    sorted by descending pixel count, then ascending ``(u, v)``.
    """
    grid = filter_frame(frame, band).temperatures
    mask = grid != band.background_sentinel
    labels, count = ndimage.label(mask, structure=_CONNECTIVITY)
    points = []
    for index in range(1, count + 1):
        rows, cols = np.nonzero(labels == index)
        if rows.size < min_blob_pixels:
            continue
        temps = grid[rows, cols]
        weights = temps - band.low + 1.0 if weighted else np.ones_like(temps)
        total = weights.sum()
        u = float((weights * cols).sum() / total)
        v = float((weights * rows).sum() / total)
        points.append(HeatPoint((u, v), float(temps.mean()), int(rows.size), frame.camera_id))
    points.sort(key=lambda p: (-p.pixel_count, p.u, p.v))
    return points


# --------------------------------------------------------------------------
# frame pairing


def select_frame_pair(left: deque, right: deque, max_skew: float) -> Optional[FramePair]:
    """Pick the buffered (left, right) pair with the smallest time skew.

    ``left`` and ``right`` are time-ordered buffers and are mutated: the
    chosen frames and everything older in each buffer are dropped.  Returns
    ``None`` (buffers untouched) when no pair is within ``max_skew``.
    Ties go to the earliest left frame, then the earliest right frame.
    """
    best = None
    for i, lf in enumerate(left):
        for j, rf in enumerate(right):
            skew = abs(lf.timestamp - rf.timestamp)
            if best is None or skew < best[0]:
                best = (skew, i, j)
    if best is None or best[0] > max_skew:
        return None
    _, i, j = best
    for _ in range(i):
        left.popleft()
    for _ in range(j):
        right.popleft()
    return FramePair(left.popleft(), right.popleft())


class FramePairer:
    """Thread-safe buffer turning two asynchronous frame streams into pairs.

    Producers call :meth:`push` (possibly from two threads); a single
    consumer calls :meth:`pop_pair`.
    """

    def __init__(self, max_skew: float = 0.1) -> None:
        self.max_skew = max_skew
        self._buffers = {"left": deque(), "right": deque()}
        self._lock = threading.Lock()

    def push(self, frame: ThermalFrame) -> None:
        with self._lock:
            buf = self._buffers[frame.camera_id]
            if buf and frame.timestamp < buf[-1].timestamp:
                raise ValueError(
                    f"{frame.camera_id} stream is not time-ordered at t={frame.timestamp}"
                )
            buf.append(frame)
            self._prune()

    def pop_pair(self) -> Optional[FramePair]:
        with self._lock:
            return select_frame_pair(self._buffers["left"], self._buffers["right"], self.max_skew)

    def pending(self) -> Tuple[int, int]:
        with self._lock:
            return len(self._buffers["left"]), len(self._buffers["right"])

    def _prune(self) -> None:
        # A frame older than the other stream's newest frame by more than
        # max_skew can never be paired again; drop it to bound the buffer.
        for mine, other in (("left", "right"), ("right", "left")):
            if not self._buffers[other]:
                continue
            newest = self._buffers[other][-1].timestamp
            buf = self._buffers[mine]
            while buf and newest - buf[0].timestamp > self.max_skew:
                buf.popleft()


def pair_streams(
    left: Iterable[ThermalFrame], right: Iterable[ThermalFrame], max_skew: float = 0.1
) -> Iterator[FramePair]:
    """Replay two recorded streams in arrival order, yielding pairs as they form."""
    events = [(f.timestamp, 0, i, f) for i, f in enumerate(left)]
    events += [(f.timestamp, 1, i, f) for i, f in enumerate(right)]
    events.sort(key=lambda e: e[:3])
    pairer = FramePairer(max_skew)
    for _, _, _, frame in events:
        pairer.push(frame)
        pair = pairer.pop_pair()
        if pair is not None:
            yield pair


# --------------------------------------------------------------------------
# frame file format (newline-delimited JSON, one document per frame)


def frame_to_dict(frame: ThermalFrame) -> dict:
    return {
        "camera": frame.camera_id,
        "t": frame.timestamp,
        "w": frame.width,
        "h": frame.height,
        "celsius": [float(x) for x in frame.temperatures.ravel()],
    }


def frame_from_dict(doc: dict) -> ThermalFrame:
    if not isinstance(doc, dict):
        raise FrameFormatError("frame document must be a JSON object")
    missing = {"camera", "t", "w", "h", "celsius"} - doc.keys()
    if missing:
        raise FrameFormatError(f"missing keys: {', '.join(sorted(missing))}")
    w, h = doc["w"], doc["h"]
    if not (isinstance(w, int) and isinstance(h, int) and w > 0 and h > 0):
        raise FrameFormatError(f"invalid dimensions w={w!r} h={h!r}")
    values = doc["celsius"]
    if not isinstance(values, list) or len(values) != w * h:
        raise FrameFormatError(f"celsius must hold w*h = {w * h} values")
    try:
        grid = np.asarray(values, dtype=np.float64).reshape(h, w)
        return ThermalFrame(doc["camera"], float(doc["t"]), grid)
    except (TypeError, ValueError) as exc:
        raise FrameFormatError(str(exc)) from None


def read_stream(source: Union[str, Path, TextIO]) -> List[ThermalFrame]:
    """Parse a newline-delimited frame stream; blank lines are skipped."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return _read_lines(fh, str(source))
    return _read_lines(source, getattr(source, "name", None))


def _read_lines(fh: TextIO, name: Optional[str]) -> List[ThermalFrame]:
    frames = []
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FrameFormatError(f"invalid JSON: {exc.msg}", lineno, name) from None
        try:
            frames.append(frame_from_dict(doc))
        except FrameFormatError as exc:
            raise FrameFormatError(str(exc), lineno, name) from None
    return frames


def write_stream(target: Union[str, Path, TextIO], frames: Iterable[ThermalFrame]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            write_stream(fh, frames)
        return
    for frame in frames:
        target.write(json.dumps(frame_to_dict(frame), separators=(",", ":")))
        target.write("\n")

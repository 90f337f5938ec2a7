"""Left/right heat point correspondence by polygon shape matching.

Both cameras see the same constellation of heat points shifted by the
disparity.  Candidate polygons (all k-subsets, k = the smaller point count)
are translated onto their vertex centroid, their vertices put in angular
order and cyclically aligned by angle RMSE; the candidate pair with the
smallest summed vertex distance wins.  Pairs whose blob temperatures differ
too much are rejected afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

from .thermal import HeatPoint

SINGLE = "single"
EQUAL = "equal"
UNEQUAL = "unequal"
ONE_SIDED = "one_sided"

DEFAULT_MAX_TEMP_DELTA = 10.0
DEFAULT_MAX_POINTS = 8

Offset = Tuple[float, float]


class MatchError(ValueError):
    pass


class DegeneratePolygonError(MatchError):
    pass


class TooManyPointsError(MatchError):
    pass


@dataclass(frozen=True)
class PointSet:
    points: Tuple[HeatPoint, ...]
    camera_id: str

    def __post_init__(self) -> None:
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        for p in points:
            if p.camera_id != self.camera_id:
                raise MatchError(f"point from {p.camera_id!r} camera in {self.camera_id!r} set")
        coords = {p.centroid for p in points}
        if len(coords) != len(points):
            raise MatchError("point set contains duplicate coordinates")

    @classmethod
    def of(cls, points: Iterable[HeatPoint], camera_id: Optional[str] = None) -> "PointSet":
        points = tuple(points)
        if camera_id is None:
            camera_id = points[0].camera_id if points else "left"
        return cls(points, camera_id)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index: int) -> HeatPoint:
        return self.points[index]

    def canonical(self) -> "PointSet":
        """Same points sorted by ``(u, v)``, so results never depend on input order."""
        return PointSet(tuple(sorted(self.points, key=lambda p: p.centroid)), self.camera_id)


@dataclass(frozen=True)
class Correspondence:
    left: HeatPoint
    right: HeatPoint
    score: float = 0.0

    @property
    def disparity(self) -> float:
        """Horizontal offset ``u_left - u_right``; positive for targets in front of the rig."""
        return self.left.u - self.right.u

    @property
    def vertical_offset(self) -> float:
        return self.left.v - self.right.v

    @property
    def offset_norm(self) -> float:
        return math.hypot(self.disparity, self.vertical_offset)

    @property
    def temperature_delta(self) -> float:
        return abs(self.left.mean_temperature - self.right.mean_temperature)


@dataclass(frozen=True)
class MatchResult:
    pairs: Tuple[Correspondence, ...]
    unmatched_left: Tuple[HeatPoint, ...]
    unmatched_right: Tuple[HeatPoint, ...]
    case: str
    score: Optional[float] = None  # summed score of the winning polygon pair

    def index_pairs(self, left: Sequence[HeatPoint], right: Sequence[HeatPoint]) -> List[Tuple[int, int]]:
        """Pairs as sorted ``(left_index, right_index)`` positions within the given inputs."""
        li = {p.centroid: i for i, p in enumerate(left)}
        ri = {p.centroid: i for i, p in enumerate(right)}
        return sorted((li[c.left.centroid], ri[c.right.centroid]) for c in self.pairs)


def classify_case(left: Sequence[HeatPoint], right: Sequence[HeatPoint]) -> str:
    n_left, n_right = len(left), len(right)
    if n_left == 0 or n_right == 0:
        return ONE_SIDED
    if n_left == n_right == 1:
        return SINGLE
    if n_left == n_right:
        return EQUAL
    return UNEQUAL


def enumerate_polygons(points: Sequence[HeatPoint], k: int) -> List[List[HeatPoint]]:
    """All k-subsets in lexicographic index order, each angularly ordered.

    Subsets whose vertices cannot be ordered (a vertex on the centroid) are
    returned in index order; :func:`order_points` reports them when asked.
    """
    if not 1 <= k <= len(points):
        raise MatchError(f"polygon size k={k} outside [1, {len(points)}]")
    polygons = []
    for combo in combinations(range(len(points)), k):
        members = [points[i] for i in combo]
        try:
            polygons.append(order_points(members))
        except DegeneratePolygonError:
            polygons.append(members)
    return polygons


def _centroid(coords: Sequence[Offset]) -> Offset:
    n = len(coords)
    return sum(c[0] for c in coords) / n, sum(c[1] for c in coords) / n


def _angle(du: float, dv: float) -> float:
    a = math.atan2(dv, du)
    return math.pi if a == -math.pi else a


def order_points(polygon: Sequence[HeatPoint]) -> List[HeatPoint]:
    """Sort vertices by angle around the polygon centroid, ties by radius."""
    polygon = list(polygon)
    if not polygon:
        raise MatchError("cannot order an empty polygon")
    if len(polygon) == 1:
        return polygon
    uc, vc = _centroid([p.centroid for p in polygon])
    keyed = []
    for p in polygon:
        du, dv = p.u - uc, p.v - vc
        if du == 0.0 and dv == 0.0:
            raise DegeneratePolygonError(f"vertex {p.centroid} coincides with the polygon centroid")
        keyed.append(((_angle(du, dv), math.hypot(du, dv)), p))
    keyed.sort(key=lambda item: item[0])
    return [p for _, p in keyed]


def normalize_polygon(polygon: Sequence[HeatPoint]) -> List[Offset]:
    """Vertex coordinates relative to the polygon's vertex centroid."""
    if not polygon:
        raise MatchError("cannot normalize an empty polygon")
    uc, vc = _centroid([p.centroid for p in polygon])
    return [(p.u - uc, p.v - vc) for p in polygon]


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def align_polygons(a: Sequence[Offset], b: Sequence[Offset]) -> Tuple[int, float]:
    """Return ``(shift, score)``: vertex ``a[i]`` pairs with ``b[(i + shift) % k]``.

    The shift minimizes the RMSE of paired vertex angles (first minimum
    wins); the score is the summed Euclidean distance of the paired offsets.
    """
    if len(a) != len(b):
        raise MatchError(f"polygon sizes differ: {len(a)} vs {len(b)}")
    k = len(a)
    if k == 0:
        raise MatchError("cannot align empty polygons")
    ang_a = [_angle(*o) for o in a]
    ang_b = [_angle(*o) for o in b]
    best_shift, best_rmse = 0, math.inf
    for shift in range(k):
        sq = sum(_wrap(ang_a[i] - ang_b[(i + shift) % k]) ** 2 for i in range(k))
        rmse = math.sqrt(sq / k)
        if rmse < best_rmse:
            best_shift, best_rmse = shift, rmse
    score = sum(
        math.hypot(a[i][0] - b[(i + best_shift) % k][0], a[i][1] - b[(i + best_shift) % k][1])
        for i in range(k)
    )
    return best_shift, score


def polygon_distance(a: Sequence[Offset], b: Sequence[Offset]) -> float:
    return align_polygons(a, b)[1]


@dataclass
class _Candidate:
    indices: Tuple[int, ...]
    ordered: List[HeatPoint]
    offsets: List[Offset]


def _candidates(points: PointSet, k: int) -> List[_Candidate]:
    out = []
    for combo in combinations(range(len(points)), k):
        try:
            ordered = order_points([points[i] for i in combo])
        except DegeneratePolygonError:
            continue
        out.append(_Candidate(combo, ordered, normalize_polygon(ordered)))
    return out


def match(
    left: Sequence[HeatPoint],
    right: Sequence[HeatPoint],
    max_temp_delta: float = DEFAULT_MAX_TEMP_DELTA,
    max_vertical_disparity: Optional[float] = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> MatchResult:
    """Pair left and right heat points.

    Inputs are canonicalized (sorted by ``(u, v)``) first, so neither the
    input order nor the tie-breaking depends on how callers list points.
    Raises :class:`TooManyPointsError` when a side exceeds ``max_points``.
    """
    lset = (left if isinstance(left, PointSet) else PointSet.of(left, "left")).canonical()
    rset = (right if isinstance(right, PointSet) else PointSet.of(right, "right")).canonical()
    case = classify_case(lset.points, rset.points)
    if case == ONE_SIDED:
        return MatchResult((), lset.points, rset.points, case)
    for side in (lset, rset):
        if len(side) > max_points:
            raise TooManyPointsError(
                f"{len(side)} heat points on the {side.camera_id} image exceed the limit of {max_points}"
            )

    k = min(len(lset), len(rset))
    right_candidates = _candidates(rset, k)
    best = None  # (score, left candidate, right candidate, shift)
    for lc in _candidates(lset, k):
        for rc in right_candidates:
            shift, score = align_polygons(lc.offsets, rc.offsets)
            if best is None or score < best[0]:
                best = (score, lc, rc, shift)
    if best is None:
        return MatchResult((), lset.points, rset.points, case)

    total, lc, rc, shift = best
    pairs = []
    used_left, used_right = set(), set()
    for i in range(k):
        j = (i + shift) % k
        lp, rp = lc.ordered[i], rc.ordered[j]
        pair_score = math.hypot(lc.offsets[i][0] - rc.offsets[j][0], lc.offsets[i][1] - rc.offsets[j][1])
        pair = Correspondence(lp, rp, pair_score)
        if pair.temperature_delta > max_temp_delta:
            continue
        if max_vertical_disparity is not None and abs(pair.vertical_offset) > max_vertical_disparity:
            continue
        pairs.append(pair)
        used_left.add(lp.centroid)
        used_right.add(rp.centroid)
    pairs.sort(key=lambda c: c.left.centroid)
    return MatchResult(
        tuple(pairs),
        tuple(p for p in lset if p.centroid not in used_left),
        tuple(p for p in rset if p.centroid not in used_right),
        case,
        total,
    )

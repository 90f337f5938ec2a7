from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermostereo.matcher import (
    EQUAL,
    ONE_SIDED,
    SINGLE,
    UNEQUAL,
    DegeneratePolygonError,
    MatchError,
    PointSet,
    TooManyPointsError,
    align_polygons,
    classify_case,
    enumerate_polygons,
    match,
    normalize_polygon,
    order_points,
    polygon_distance,
)
from thermostereo.thermal import HeatPoint

from oracles import brute_force_assignment, brute_force_match


def hp(u, v, t=150.0, camera="left"):
    return HeatPoint((float(u), float(v)), t, 1, camera)


def side(coords, camera, temp=150.0):
    return [hp(u, v, temp, camera) for u, v in coords]


class TestClassify:
    @pytest.mark.parametrize("nl,nr,case", [
        (1, 1, SINGLE), (3, 3, EQUAL), (3, 2, UNEQUAL), (1, 4, UNEQUAL),
        (0, 2, ONE_SIDED), (2, 0, ONE_SIDED), (0, 0, ONE_SIDED),
    ])
    def test_cases(self, nl, nr, case):
        assert classify_case([None] * nl, [None] * nr) == case


class TestPolygons:
    def test_counts(self):
        pts = side([(i, i * i) for i in range(5)], "left")
        assert len(enumerate_polygons(pts[:3], 2)) == 3
        assert len(enumerate_polygons(pts[:3], 3)) == 1
        assert len(enumerate_polygons(pts, 3)) == math.comb(5, 3) == 10

    def test_lexicographic_membership(self):
        pts = side([(0, 0), (5, 1), (2, 7)], "left")
        members = [{p.centroid for p in poly} for poly in enumerate_polygons(pts, 2)]
        assert members == [{(0, 0), (5, 1)}, {(0, 0), (2, 7)}, {(5, 1), (2, 7)}]

    @pytest.mark.parametrize("k", [0, 4])
    def test_k_out_of_range(self, k):
        with pytest.raises(MatchError):
            enumerate_polygons(side([(0, 0), (1, 1), (3, 0)], "left"), k)

    def test_normalize(self):
        assert normalize_polygon([hp(4, 4)]) == [(0.0, 0.0)]
        assert normalize_polygon(side([(0, 0), (2, 0)], "left")) == [(-1.0, 0.0), (1.0, 0.0)]

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.tuples(st.floats(0, 31), st.floats(0, 31)), min_size=1, max_size=6, unique=True),
        st.floats(-20, 20), st.floats(-20, 20),
    )
    def test_normalize_translation_invariant(self, coords, du, dv):
        a = normalize_polygon(side(coords, "left"))
        b = normalize_polygon(side([(u + du, v + dv) for u, v in coords], "left"))
        assert sum(o[0] for o in a) == pytest.approx(0.0, abs=1e-9)
        for x, y in zip(a, b):
            assert x == pytest.approx(y, abs=1e-9)

    def test_square_counterclockwise_in_angle(self):
        square = side([(1, 1), (0, 0), (1, 0), (0, 1)], "left")
        ordered = [p.centroid for p in order_points(square)]
        # angles around (0.5, 0.5): (0,0) -135deg, (1,0) -45deg, (1,1) 45deg, (0,1) 135deg
        assert ordered == [(0, 0), (1, 0), (1, 1), (0, 1)]

    def test_two_points(self):
        ordered = order_points(side([(3, 0), (1, 0)], "left"))
        assert [p.centroid for p in ordered] == [(3, 0), (1, 0)]  # angles 0 and pi

    def test_random_order_matches_independent_sort(self):
        rng = random.Random(3)
        for _ in range(50):
            coords = [(rng.uniform(0, 32), rng.uniform(0, 32)) for _ in range(6)]
            cu = sum(c[0] for c in coords) / 6
            cv = sum(c[1] for c in coords) / 6
            expected = sorted(coords, key=lambda c: math.atan2(c[1] - cv, c[0] - cu))
            rng.shuffle(coords)
            assert [p.centroid for p in order_points(side(coords, "left"))] == expected

    def test_vertex_on_centroid(self):
        with pytest.raises(DegeneratePolygonError):
            order_points(side([(0, 0), (1, 0), (2, 0)], "left"))


class TestPolygonDistance:
    def test_identical(self):
        poly = [(-1.0, -1.0), (1.0, -1.0), (0.0, 2.0)]
        assert polygon_distance(poly, poly) == 0.0

    def test_translated_before_normalization(self):
        a = normalize_polygon(order_points(side([(1, 1), (5, 2), (3, 6)], "left")))
        b = normalize_polygon(order_points(side([(11, 4), (15, 5), (13, 9)], "right")))
        assert polygon_distance(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_scaled_segment(self):
        a = [(-1.0, 0.0), (1.0, 0.0)]
        b = [(-1.5, 0.0), (1.5, 0.0)]
        # both cyclic alignments by hand: shift 0 -> 0.5 + 0.5 = 1.0; shift 1 -> 2.5 + 2.5 = 5.0
        assert polygon_distance(a, b) == pytest.approx(1.0)
        assert align_polygons(a, b) == (0, pytest.approx(1.0))

    def test_rotated_labels_are_realigned(self):
        a = [(-1.0, -1.0), (1.0, -1.0), (0.0, 2.0)]
        b = a[1:] + a[:1]
        shift, score = align_polygons(a, b)
        assert shift == 2 and score == pytest.approx(0.0)

    def test_size_mismatch(self):
        with pytest.raises(MatchError):
            polygon_distance([(0.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=5),
           st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=5, max_size=5))
    def test_non_negative(self, a, b):
        assert polygon_distance(a, b[: len(a)]) >= 0.0


class TestMatch:
    def test_single_within_gate(self):
        result = match([hp(10, 5, 150)], [hp(6, 5, 155, "right")])
        assert result.case == SINGLE
        assert len(result.pairs) == 1
        assert result.pairs[0].disparity == pytest.approx(4.0)

    def test_single_rejected_by_temperature(self):
        result = match([hp(10, 5, 150)], [hp(6, 5, 165, "right")], max_temp_delta=10)
        assert result.pairs == ()
        assert len(result.unmatched_left) == 1 and len(result.unmatched_right) == 1

    def test_one_sided(self):
        result = match([], side([(1, 1), (5, 5)], "right"))
        assert result.case == ONE_SIDED and result.pairs == ()
        assert len(result.unmatched_right) == 2

    def test_shifted_triangle(self):
        tri = [(20.0, 10.0), (26.0, 14.0), (22.0, 20.0)]
        left = side(tri, "left")
        right = side([(u + 5.0, v) for u, v in tri], "right")
        result = match(left, right)
        assert result.case == EQUAL
        assert len(result.pairs) == 3
        assert all(c.offset_norm == pytest.approx(5.0) for c in result.pairs)
        assert all(c.disparity == pytest.approx(-5.0) for c in result.pairs)
        expected = brute_force_assignment(tri, [(u + 5.0, v) for u, v in tri])
        assert result.index_pairs(left, right) == expected

    def test_unequal_drops_point_outside_other_view(self):
        pts = [(8.0, 8.0), (16.0, 20.0), (24.0, 12.0)]
        left = side(pts, "left")
        right = side([(u - 3.0, v) for u, v in pts[:2]], "right")
        result = match(left, right)
        assert result.case == UNEQUAL
        assert result.index_pairs(left, right) == [(0, 0), (1, 1)]
        assert [p.centroid for p in result.unmatched_left] == [(24.0, 12.0)]

    def test_vertical_gate(self):
        left = [hp(10, 5)]
        right = [hp(6, 9, camera="right")]
        assert len(match(left, right).pairs) == 1
        assert match(left, right, max_vertical_disparity=2.0).pairs == ()

    def test_too_many_points(self):
        many = side([(i, 2 * i) for i in range(9)], "left")
        with pytest.raises(TooManyPointsError):
            match(many, side([(1, 1)], "right"))

    def test_duplicate_coordinates_rejected(self):
        with pytest.raises(MatchError):
            PointSet.of([hp(1, 1), hp(1, 1, 200)])

    def test_degenerate_equal_case_leaves_points_unmatched(self):
        line = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]
        result = match(side(line, "left"), side(line, "right"))
        assert result.pairs == ()
        assert len(result.unmatched_left) == 3

    def test_deterministic(self):
        rng = random.Random(11)
        left = [hp(rng.uniform(0, 32), rng.uniform(0, 32), rng.uniform(130, 160)) for _ in range(4)]
        right = [hp(rng.uniform(0, 32), rng.uniform(0, 32), rng.uniform(130, 160), "right") for _ in range(3)]
        assert match(left, right) == match(left, right)

    def test_agrees_with_oracle_on_a_fixed_case(self):
        left = [(3.0, 4.0, 150.0), (12.0, 9.0, 152.0), (20.0, 25.0, 170.0), (7.0, 28.0, 140.0)]
        right = [(9.5, 9.2, 149.0), (0.2, 4.1, 151.0), (17.1, 24.8, 168.0)]
        result = match([hp(u, v, t) for u, v, t in left], [hp(u, v, t, "right") for u, v, t in right])
        lpts = [hp(u, v, t) for u, v, t in left]
        rpts = [hp(u, v, t, "right") for u, v, t in right]
        assert result.index_pairs(lpts, rpts) == brute_force_match(left, right) == [(0, 1), (1, 0), (2, 2)]

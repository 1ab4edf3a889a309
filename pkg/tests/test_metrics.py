"""Spread metrics: dispersion, star discrepancy, distances, certificates."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dppsampler import (
    MetricReport,
    PointSet,
    dispersion,
    dispersion_lower_bound,
    distance_to_center,
    distance_to_origin,
    distance_to_point,
    metric_report,
    optimization_error_certificate,
    star_discrepancy,
)
from conftest import oracle_dispersion_grid, oracle_star_grid

unit_sets = arrays(
    np.float64,
    st.tuples(st.integers(1, 12), st.integers(1, 2)),
    elements=st.floats(0.0, 1.0),
)


def _ps(pts, d=None):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return PointSet(pts, d if d is not None else pts.shape[1])


class TestPointSet:
    def test_shape_and_k(self):
        ps = _ps([[0.1, 0.2], [0.3, 0.4]])
        assert ps.k == 2 and ps.d == 2

    def test_out_of_cube_rejected(self):
        with pytest.raises(ValueError):
            _ps([[1.2, 0.0]])
        with pytest.raises(ValueError):
            _ps([[-0.1]])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            PointSet(np.zeros((3, 2)), 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            PointSet(np.zeros((0, 2)), 2)


class TestDispersion:
    def test_single_midpoint_1d(self):
        value, method, res = dispersion(_ps([[0.5]]))
        assert value == 0.5 and method == "exact" and res is None

    def test_grid_closed_form_1d(self):
        # Equally spaced k points with both endpoints: radius 1/(2(k-1)).
        for k in (2, 5, 17, 101):
            pts = np.linspace(0.0, 1.0, k)[:, None]
            value = dispersion(_ps(pts))[0]
            assert abs(value - 1.0 / (2.0 * (k - 1))) <= 1e-15

    def test_two_opposite_corners_2d(self):
        value = dispersion(_ps([[0.0, 0.0], [1.0, 1.0]]))[0]
        assert abs(value - 1.0) < 1e-12

    def test_single_center_2d(self):
        value = dispersion(_ps([[0.5, 0.5]]))[0]
        assert abs(value - math.sqrt(0.5)) < 1e-12

    def test_single_corner_2d(self):
        value = dispersion(_ps([[0.0, 0.0]]))[0]
        assert abs(value - math.sqrt(2.0)) < 1e-12

    def test_four_corners_2d(self):
        corners = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
        value = dispersion(_ps(corners))[0]
        assert abs(value - math.sqrt(0.5)) < 1e-12

    def test_matches_brute_force(self):
        rng = np.random.default_rng(31)
        for d in (1, 2):
            for _ in range(3):
                pts = rng.random((int(rng.integers(2, 9)), d))
                exact = dispersion(_ps(pts))[0]
                lattice, err = oracle_dispersion_grid(pts, d)
                assert lattice - 1e-12 <= exact <= lattice + err + 1e-12

    def test_grid_approx_labels_and_value_3d(self):
        corners = np.array(
            [[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)]
        )
        value, method, res = dispersion(PointSet(corners, 3))
        assert method == "grid-approx" and res is not None
        true = math.sqrt(3.0) / 2.0
        assert true - res * math.sqrt(3.0) / 2.0 - 1e-12 <= value <= true + 1e-12

    @settings(max_examples=150, deadline=None)
    @given(pts=unit_sets)
    def test_never_beats_lower_bound(self, pts):
        ps = PointSet(pts, pts.shape[1])
        value = dispersion(ps)[0]
        assert value >= dispersion_lower_bound(ps.k, ps.d) - 1e-9
        assert value <= math.sqrt(ps.d) + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(pts=unit_sets, extra=st.floats(0.0, 1.0))
    def test_adding_a_point_never_hurts(self, pts, extra):
        d = pts.shape[1]
        base = dispersion(PointSet(pts, d))[0]
        added = np.vstack([pts, np.full((1, d), extra)])
        assert dispersion(PointSet(added, d))[0] <= base + 1e-12


class TestLowerBound:
    def test_one_dimension_closed_form(self):
        for k in (1, 2, 10, 200):
            assert abs(dispersion_lower_bound(k, 1) - 1.0 / (2.0 * k)) < 1e-15

    def test_two_dimensions(self):
        assert abs(dispersion_lower_bound(1, 2) - 1.0 / math.sqrt(math.pi)) < 1e-15
        assert abs(dispersion_lower_bound(4, 2) - 0.5 / math.sqrt(math.pi)) < 1e-15

    def test_validation(self):
        with pytest.raises(ValueError):
            dispersion_lower_bound(0, 1)
        with pytest.raises(ValueError):
            dispersion_lower_bound(1, 0)


class TestStarDiscrepancy:
    def test_single_midpoint_1d(self):
        value, method = star_discrepancy(_ps([[0.5]]))
        assert value == 0.5 and method == "exact"

    def test_single_origin_1d(self):
        # The point sits inside every nonempty anchored box, so shrinking the
        # box toward zero volume drives the deviation to 1.
        value, _ = star_discrepancy(_ps([[0.0]]))
        assert value == 1.0

    def test_uniform_grid_1d(self):
        for k in (2, 5, 11, 50):
            pts = np.linspace(0.0, 1.0, k)[:, None]
            value = star_discrepancy(_ps(pts))[0]
            assert abs(value - 1.0 / k) <= 1e-15

    def test_centered_stratified_1d_is_optimal(self):
        # Midpoints (2i-1)/(2k) achieve the 1-d optimum 1/(2k).
        for k in (1, 2, 7, 40):
            pts = ((2 * np.arange(1, k + 1) - 1) / (2.0 * k))[:, None]
            value = star_discrepancy(_ps(pts))[0]
            assert abs(value - 1.0 / (2.0 * k)) <= 1e-15

    def test_matches_brute_force(self):
        rng = np.random.default_rng(32)
        for d in (1, 2):
            for _ in range(3):
                pts = rng.random((int(rng.integers(2, 9)), d))
                exact = star_discrepancy(_ps(pts))[0]
                lattice, err = oracle_star_grid(pts, d)
                assert lattice - 1e-12 <= exact <= lattice + err + 1e-12

    def test_grid_approx_label_3d(self):
        value, method = star_discrepancy(PointSet(np.zeros((1, 3)), 3))
        assert method == "grid-approx"
        assert value >= 0.98

    @settings(max_examples=150, deadline=None)
    @given(pts=unit_sets)
    def test_bounds(self, pts):
        ps = PointSet(pts, pts.shape[1])
        value = star_discrepancy(ps)[0]
        assert 0.0 < value <= 1.0
        # No set beats perfectly centered stratification in one dimension.
        if ps.d == 1:
            assert value >= 1.0 / (2.0 * ps.k) - 1e-12

    @settings(max_examples=100, deadline=None)
    @given(pts=unit_sets)
    def test_empty_ball_forces_discrepancy(self, pts):
        # An empty ball of radius r contains an empty anchored-box witness of
        # volume at least (r/sqrt(d))^d, and anchored boxes see at least
        # 2^-d of any box's deviation, so r/sqrt(d) <= 2 * star^(1/d).
        ps = PointSet(pts, pts.shape[1])
        r = dispersion(ps)[0]
        star = star_discrepancy(ps)[0]
        assert r / math.sqrt(ps.d) <= 2.0 * star ** (1.0 / ps.d) + 1e-9


class TestDistances:
    def test_member_reference_is_zero(self):
        ps = _ps([[0.2, 0.7], [0.5, 0.5]])
        assert distance_to_point(ps, [0.5, 0.5]) == 0.0

    def test_squared_distance_1d(self):
        assert distance_to_point(_ps([[0.0]]), [0.5]) == 0.25

    def test_corner_to_origin_2d(self):
        assert distance_to_origin(_ps([[1.0, 1.0]])) == 2.0

    def test_center_helper(self):
        assert distance_to_center(_ps([[0.0, 0.0]])) == 0.5

    def test_nearest_point_wins(self):
        ps = _ps([[0.1], [0.4], [0.9]])
        assert abs(distance_to_point(ps, [0.45]) - 0.05**2) < 1e-15

    def test_reference_validation(self):
        ps = _ps([[0.5, 0.5]])
        with pytest.raises(ValueError):
            distance_to_point(ps, [0.5])
        with pytest.raises(ValueError):
            distance_to_point(ps, [1.5, 0.0])

    @settings(max_examples=100, deadline=None)
    @given(pts=unit_sets, ref=st.floats(0.0, 1.0))
    def test_adding_a_point_never_hurts(self, pts, ref):
        d = pts.shape[1]
        reference = np.full(d, ref)
        base = distance_to_point(PointSet(pts, d), reference)
        added = np.vstack([pts, np.full((1, d), 1.0 - ref)])
        assert distance_to_point(PointSet(added, d), reference) <= base


class TestCertificate:
    def test_zero_dispersion(self):
        assert optimization_error_certificate(0.0, 5.0) == 0.0

    def test_scaling(self):
        assert abs(optimization_error_certificate(0.1, 2.0) - 0.2) < 1e-15

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            optimization_error_certificate(-0.1, 1.0)
        with pytest.raises(ValueError):
            optimization_error_certificate(0.1, -1.0)

    def test_bounds_lipschitz_search_error_on_grid(self):
        # 11-point grid: dispersion 0.05, so any 1-Lipschitz objective is
        # optimized to within 0.05 by the best grid point.
        pts = np.linspace(0.0, 1.0, 11)[:, None]
        ps = _ps(pts)
        cert = optimization_error_certificate(dispersion(ps)[0], 1.0)
        assert abs(cert - 0.05) < 1e-12
        for x_star in (0.3, 0.33, 0.876, 1.0):
            best = max(1.0 - abs(float(x) - x_star) for x in pts[:, 0])
            assert 1.0 - best <= cert + 1e-12


class TestReport:
    def test_fields_match_components(self):
        rng = np.random.default_rng(33)
        pts = rng.random((6, 2))
        ps = _ps(pts)
        report = metric_report(ps)
        assert isinstance(report, MetricReport)
        assert report.dispersion == dispersion(ps)[0]
        assert report.dispersion_method == "exact"
        assert report.dispersion_resolution is None
        assert report.star_discrepancy == star_discrepancy(ps)[0]
        assert report.star_method == "exact"
        assert report.dist_to_center == distance_to_center(ps)
        assert report.dist_to_origin == distance_to_origin(ps)
        assert report.lower_bound == dispersion_lower_bound(6, 2)

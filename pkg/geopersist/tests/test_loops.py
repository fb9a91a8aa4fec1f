"""Tests for r-loops, snapping, homology classes of fillings and explicit homotopies."""
from pathlib import Path
import sys

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
from errors import DensityViolation, DomainError, PreconditionFailed, UnsupportedModel, ValidationError
from homology import FieldP
from loops import (
    RLoop,
    SampledLoop,
    build_nullhomotopy,
    close_loops_homotopic,
    concatenate,
    fill,
    homology_class_of_loop,
    ladder_homotopy,
    lasso_loop,
    make_lasso,
    r_sample_of_circle,
    snap_to_sample,
    verify_disk,
    verify_ladder,
    verify_nullhomotopy,
)
from sampling import SampleSet, enrich_with_critical_points, restrict_metric, sample_uniform
from spaces import Circle, WedgeOfCircles


def shifted(model, loop, offset):
    """The loop moved along the circle by `offset`."""
    return RLoop(tuple(model.point(x.coords[0] + offset) for x in loop.points), loop.bound)


class TestRLoops:
    """r-samples of circles and their fillings."""

    def test_r_sample_spacing(self, circle):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        assert len(loop) == 11
        assert loop.check(circle) is loop

    @pytest.mark.parametrize("length,delta", [(0.7, 0.1), (0.3, 0.1), (0.6, 0.2), (1.0, 0.1), (2.1, 0.3)])
    def test_spacing_stays_below_delta_on_rounding(self, length, delta):
        model = Circle(length)
        loop = r_sample_of_circle(model.critical_circles()[0], delta)
        assert length / len(loop) < delta
        assert loop.check(model) is loop

    def test_at_least_three_points(self, circle):
        assert len(r_sample_of_circle(circle.critical_circles()[0], 1.0)) == 3

    def test_nonpositive_delta(self, circle):
        with pytest.raises(PreconditionFailed):
            r_sample_of_circle(circle.critical_circles()[0], 0.0)

    def test_check_rejects_long_steps(self, circle):
        loop = RLoop((circle.point(0.0), circle.point(0.5)), 0.3)
        with pytest.raises(ValidationError):
            loop.check(circle)

    def test_fill_follows_the_geodesics(self, circle):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        filled = fill(loop, circle)
        assert filled.length == pytest.approx(1.0)
        assert filled(0.05).coords[0] == pytest.approx(0.05)
        assert filled(1.05).coords[0] == pytest.approx(0.05)

    def test_based_loop(self, circle):
        assert r_sample_of_circle(circle.critical_circles()[0], 0.1).is_based(circle)
        assert not shifted(circle, r_sample_of_circle(circle.critical_circles()[0], 0.1), 0.01).is_based(circle)


class TestHomologyClass:
    """Winding coordinates of filled loops."""

    def test_circle_sample_winds_once(self, circle):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        assert homology_class_of_loop(circle, loop).tolist() == [1]

    def test_doubled_loop_over_f2_and_f3(self, circle):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        twice = concatenate(loop, loop)
        assert homology_class_of_loop(circle, twice, FieldP(2)).tolist() == [0]
        assert homology_class_of_loop(circle, twice, FieldP(3)).tolist() == [2]

    def test_wedge_petal(self, wedge):
        loop = r_sample_of_circle(wedge.critical_circles()[1], 0.2)
        assert homology_class_of_loop(wedge, loop).tolist() == [0, 1]

    def test_torus_axis(self, torus):
        loop = r_sample_of_circle(torus.critical_circles()[1], 0.1)
        assert homology_class_of_loop(torus, loop, FieldP(5)).tolist() == [0, 1]

    def test_backtracking_loop_is_trivial(self, circle):
        loop = RLoop((circle.point(0.0), circle.point(0.1), circle.point(0.2), circle.point(0.1)), 0.15)
        assert homology_class_of_loop(circle, loop).tolist() == [0]

    def test_metric_graph_has_no_windings(self, graph):
        loop = RLoop((graph.point(0, 0.1), graph.point(0, 0.2), graph.point(0, 0.3)), 0.5)
        with pytest.raises(UnsupportedModel):
            homology_class_of_loop(graph, loop)

    def test_concatenation_needs_a_common_start(self, circle):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        with pytest.raises(DomainError):
            concatenate(loop, shifted(circle, loop, 0.01))


class TestLassos:
    """Geodesic lassos from the basepoint."""

    def test_catalogue_circles_start_at_the_basepoint(self, wedge):
        lasso = make_lasso(wedge, wedge.critical_circles()[1])
        assert lasso.approach == (wedge.basepoint,)
        loop = lasso_loop(wedge, lasso, 0.2)
        assert loop.is_based(wedge)
        assert homology_class_of_loop(wedge, loop).tolist() == [0, 1]

    def test_short_petal_spacing_on_rounding(self):
        wedge = WedgeOfCircles([0.7, 1.0])
        loop = lasso_loop(wedge, make_lasso(wedge, wedge.critical_circles()[0]), 0.1)
        assert loop.check(wedge) is loop
        assert homology_class_of_loop(wedge, loop).tolist() == [1, 0]

    def test_circle_of_another_model(self, wedge):
        with pytest.raises(DomainError):
            make_lasso(wedge, Circle(1.0).critical_circles()[0])


class TestSnapping:
    """Nearest-sample snapping of r-loops."""

    def test_snapped_bound_grows_by_2s(self, circle, circle_sample):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        snapped = snap_to_sample(circle, loop, circle_sample)
        assert snapped.bound == pytest.approx(0.2)
        assert len(snapped) == len(loop)
        dmatrix = restrict_metric(circle, circle_sample)
        assert all(dmatrix[a, b] < snapped.bound for a, b in snapped.steps())

    def test_sparse_sample_is_rejected(self, circle):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        sparse = SampleSet(circle.model_id, (circle.basepoint,), 0.05)
        with pytest.raises(DensityViolation) as err:
            snap_to_sample(circle, loop, sparse)
        assert "is not below s" in str(err.value)

    def test_collapse_drops_repeats(self):
        loop = SampledLoop((1, 1, 2, 3, 3, 1), 0.2)
        assert loop.collapsed().indices == (1, 2, 3)
        assert loop.edges() == [(1, 2), (2, 3), (1, 3)]

    def test_close_loops(self, circle):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        assert close_loops_homotopic(circle, loop, shifted(circle, loop, 0.01), 0.2)
        assert not close_loops_homotopic(circle, loop, shifted(circle, loop, 0.15), 0.2)
        shorter = r_sample_of_circle(circle.critical_circles()[0], 0.2)
        assert not close_loops_homotopic(circle, loop, shorter, 0.5)


class TestNullhomotopy:
    """The three-anchor disk contracting a short circle."""

    def test_dense_mode_on_circle(self, circle, circle_sample):
        dmatrix = restrict_metric(circle, circle_sample)
        nh = build_nullhomotopy(circle, circle.critical_circles()[0], circle_sample, 0.5, 0.05, dmatrix=dmatrix)
        check = verify_nullhomotopy(nh, dmatrix, 0.5)
        assert check.passed, check.violation
        assert check.max_diameter < 0.5
        assert len(nh.interior_vertices) == 3

    def test_equidistant_mode_on_enriched_sample(self, circle, enriched_circle_sample):
        dmatrix = restrict_metric(circle, enriched_circle_sample)
        nh = build_nullhomotopy(circle, circle.critical_circles()[0], enriched_circle_sample, 0.4, 0.05,
                                mode="equidistant", dmatrix=dmatrix)
        assert verify_nullhomotopy(nh, dmatrix, 0.4).passed
        anchors = [enriched_circle_sample.points[q].coords[0] for q in nh.interior_vertices]
        assert anchors == pytest.approx([0.0, 1 / 3, 2 / 3])

    def test_dense_mode_needs_room(self, circle, circle_sample):
        with pytest.raises(PreconditionFailed) as err:
            build_nullhomotopy(circle, circle.critical_circles()[0], circle_sample, 0.4, 0.05)
        assert "3*(" in err.value.inequality

    def test_equidistant_mode_needs_the_anchors(self, circle, circle_sample):
        with pytest.raises(PreconditionFailed):
            build_nullhomotopy(circle, circle.critical_circles()[0], circle_sample, 0.4, 0.05, mode="equidistant")

    def test_equidistant_mode_needs_a_below_3r(self, circle, enriched_circle_sample):
        with pytest.raises(PreconditionFailed) as err:
            build_nullhomotopy(circle, circle.critical_circles()[0], enriched_circle_sample, 0.3, 0.05,
                               mode="equidistant")
        assert err.value.inequality == "1.0 < 3*0.3"

    def test_delta_too_large(self, circle, circle_sample):
        with pytest.raises(PreconditionFailed):
            build_nullhomotopy(circle, circle.critical_circles()[0], circle_sample, 0.5, 0.05, delta=0.45)

    def test_unknown_mode(self, circle, circle_sample):
        with pytest.raises(PreconditionFailed):
            build_nullhomotopy(circle, circle.critical_circles()[0], circle_sample, 0.5, 0.05, mode="spiral")

    def test_wedge_petal(self, wedge):
        sample = sample_uniform(wedge, 0.08, seed=1)
        dmatrix = restrict_metric(wedge, sample)
        r = 2 / 3 + 2 * 0.08 + 0.02
        nh = build_nullhomotopy(wedge, wedge.critical_circles()[1], sample, r, 0.08, dmatrix=dmatrix)
        assert verify_nullhomotopy(nh, dmatrix, r).passed
        assert nh.circle == "petal-1"

    def test_broken_disk_is_reported(self, circle, circle_sample):
        dmatrix = restrict_metric(circle, circle_sample)
        nh = build_nullhomotopy(circle, circle.critical_circles()[0], circle_sample, 0.5, 0.05, dmatrix=dmatrix)
        check = verify_disk(nh.triangles[1:], [nh.boundary], dmatrix, 0.5)
        assert not check.passed
        assert check.violation.startswith("(b)")
        assert verify_nullhomotopy(nh, dmatrix, 0.3).violation.startswith("(a)")

    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(s=st.floats(min_value=0.02, max_value=0.08), slack=st.floats(min_value=0.01, max_value=0.2),
           seed=st.integers(0, 1000))
    def test_dense_mode_randomized(self, s, slack, seed):
        circle = Circle(1.0)
        sample = sample_uniform(circle, s, seed=seed)
        r = min(1 / 3 + 2 * s + slack, 0.7)
        dmatrix = restrict_metric(circle, sample)
        nh = build_nullhomotopy(circle, circle.critical_circles()[0], sample, r, s, dmatrix=dmatrix)
        assert verify_nullhomotopy(nh, dmatrix, r).passed

    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(s=st.floats(min_value=0.02, max_value=0.08), r=st.floats(min_value=1 / 3 + 0.01, max_value=0.6),
           seed=st.integers(0, 1000))
    def test_equidistant_mode_randomized(self, s, r, seed):
        circle = Circle(1.0)
        sample = enrich_with_critical_points(circle, sample_uniform(circle, s, seed=seed), circle.critical_circles())
        dmatrix = restrict_metric(circle, sample)
        nh = build_nullhomotopy(circle, circle.critical_circles()[0], sample, r, s, mode="equidistant", dmatrix=dmatrix)
        assert verify_nullhomotopy(nh, dmatrix, r).passed


class TestLadder:
    """Annulus between two snappings."""

    def test_shifted_loop(self, circle, circle_sample):
        loop = r_sample_of_circle(circle.critical_circles()[0], 0.1)
        first = snap_to_sample(circle, loop, circle_sample)
        second = snap_to_sample(circle, shifted(circle, loop, 0.01), circle_sample)
        ladder = ladder_homotopy(first, second, 0.25)
        check = verify_ladder(ladder, restrict_metric(circle, circle_sample))
        assert check.passed, check.violation

    def test_sizes_must_agree(self):
        with pytest.raises(ValidationError):
            ladder_homotopy(SampledLoop((0, 1, 2), 0.1), SampledLoop((0, 1), 0.1), 0.2)

    def test_ladder_across_petals_is_too_wide(self):
        """Rungs between loops on different petals pass through the wedge point."""
        wedge = WedgeOfCircles([1.0, 1.0])
        sample = sample_uniform(wedge, 0.05, seed=0)
        first = snap_to_sample(wedge, r_sample_of_circle(wedge.critical_circles()[0], 0.1), sample)
        second = snap_to_sample(wedge, r_sample_of_circle(wedge.critical_circles()[1], 0.1), sample)
        ladder = ladder_homotopy(first, second, 0.25)
        assert not verify_ladder(ladder, restrict_metric(wedge, sample)).passed

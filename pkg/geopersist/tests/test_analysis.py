"""Tests for stability matching, initially constant persistences, order, minimality and rank windows."""
from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
from analysis import (
    build_icp,
    compare_order,
    default_rmax,
    interleaving_shadow,
    isomorphism_windows,
    minimality_check,
    sample_reduction,
    stability_figure,
    surjectivity_windows,
    verify_realization,
    verify_stability,
)
from errors import ArgumentError, DomainError, NotInitiallyConstant, PreconditionFailed
from homology import DecoratedDiagram, FieldP, PersistenceInterval
from rips import critical_radii, refined_grid
from sampling import SampleSet, enrich_with_critical_points, sample_uniform, verify_density
from spaces import known_diagram


def bars(*pairs, rmax=1.0):
    return DecoratedDiagram(intervals=tuple(PersistenceInterval(b, d) for b, d in pairs), rmax=rmax)


def grid_of(reduction):
    f = reduction.filtration
    return refined_grid(critical_radii(f), f.rmax)


@pytest.fixture
def wedge_base(wedge):
    """Unjittered 0.08 grid on the wedge: 13 points on petal 0, 26 on petal 1."""
    return sample_uniform(wedge, 0.08, jitter=False)


@pytest.fixture
def wedge_enriched_long(wedge, wedge_base):
    """Exact death on the long petal only: deaths 5/13 and 2/3."""
    return enrich_with_critical_points(wedge, wedge_base, [wedge.critical_circles()[1]])


@pytest.fixture
def wedge_enriched_short(wedge, wedge_base):
    """Exact death on the short petal only: deaths 1/3 and 18/26."""
    return enrich_with_critical_points(wedge, wedge_base, [wedge.critical_circles()[0]])


class TestDefaults:
    """Horizon defaults."""

    def test_catalogue_horizon(self, circle, wedge):
        assert default_rmax(circle, 0.05) == pytest.approx(1 / 3 + 0.15)
        assert default_rmax(wedge, 0.08) == pytest.approx(2 / 3 + 0.24)

    def test_graph_horizon(self, graph):
        assert default_rmax(graph, 0.1) == pytest.approx(graph.diameter() / 2 + 0.1)


class TestVerifyStability:
    """The matching an s-dense sample must admit."""

    def test_enriched_sample_passes(self, circle, enriched_circle_sample):
        d = sample_reduction(circle, enriched_circle_sample).diagram
        report = verify_stability(known_diagram(circle), d, 0.05)
        assert report.passed
        assert report.matching == [(0, 0)]
        assert report.measured["death_offsets"][0] == pytest.approx(0.0, abs=1e-12)

    def test_jittered_sample_passes(self, circle, circle_sample):
        d = sample_reduction(circle, circle_sample).diagram
        assert verify_stability(known_diagram(circle), d, 0.05).passed

    def test_long_spurious_bar(self, circle):
        report = verify_stability(known_diagram(circle), bars((0.01, 0.34), (0.1, 0.2)), 0.05)
        assert not report.passed
        assert report.conditions() == [3]
        assert report.to_dict()["verdict"] == "fail"

    def test_death_below_the_lower_bound(self, circle):
        report = verify_stability(known_diagram(circle), bars((0.01, 0.33)), 0.05)
        assert report.conditions() == [2]
        assert "lower bound" in report.violations[0]["detail"]

    def test_death_above_the_upper_bound(self, circle):
        report = verify_stability(known_diagram(circle), bars((0.01, 0.5)), 0.05)
        assert report.conditions() == [2]
        assert "upper bound" in report.violations[0]["detail"]

    def test_late_birth(self, circle):
        report = verify_stability(known_diagram(circle), bars((0.2, 0.34)), 0.05)
        assert report.conditions() == [1]

    def test_short_spurious_bar_goes_to_the_diagonal(self, circle):
        report = verify_stability(known_diagram(circle), bars((0.01, 0.34), (0.2, 0.22)), 0.05)
        assert report.passed
        assert report.diagonal == [1]

    def test_nonpositive_s(self, circle):
        with pytest.raises(ArgumentError):
            verify_stability(known_diagram(circle), bars(), 0.0)

    def test_space_births_must_be_zero(self):
        with pytest.raises(ArgumentError):
            verify_stability(bars((0.1, 0.3)), bars(), 0.05)


class TestInitiallyConstant:
    """Classes alive at r0 = 2s identified in G."""

    def test_enriched_circle(self, circle, enriched_circle_sample):
        icp = build_icp(circle, enriched_circle_sample)
        assert icp.dimension == 1
        assert icp.class_coordinates.tolist() == [[1]]
        assert icp.r0 == pytest.approx(0.1)
        assert icp.deaths() == pytest.approx([1 / 3])

    def test_wedge_has_rank_two(self, wedge, wedge_base):
        icp = build_icp(wedge, wedge_base)
        assert icp.dimension == 2
        assert icp.deaths() == pytest.approx([18 / 26, 5 / 13])
        assert icp.r0 < icp.eps_h

    def test_too_sparse(self, circle):
        sample = SampleSet(circle.model_id, (circle.point(0.0), circle.point(1 / 3), circle.point(2 / 3)), 0.1)
        with pytest.raises(NotInitiallyConstant):
            build_icp(circle, sample)

    def test_density_above_the_first_critical_value(self, circle):
        sample = SampleSet(circle.model_id, (circle.point(0.0), circle.point(1 / 3), circle.point(2 / 3)), 0.2)
        with pytest.raises(PreconditionFailed):
            build_icp(circle, sample)


class TestCompareOrder:
    """Kernel-inclusion order of two sample persistences."""

    def test_subsample_dies_no_earlier(self, circle, circle_sample, enriched_circle_sample):
        result = compare_order(build_icp(circle, circle_sample), build_icp(circle, enriched_circle_sample))
        assert result.verdict in ("B<=A", "equal")
        assert result.self_check

    def test_self_comparison_is_equal(self, circle, enriched_circle_sample):
        icp = build_icp(circle, enriched_circle_sample)
        assert compare_order(icp, icp).verdict == "equal"

    def test_incomparable(self, wedge, wedge_enriched_long, wedge_enriched_short):
        a = build_icp(wedge, wedge_enriched_long)
        b = build_icp(wedge, wedge_enriched_short)
        assert a.deaths() == pytest.approx([2 / 3, 5 / 13])
        assert b.deaths() == pytest.approx([18 / 26, 1 / 3])
        result = compare_order(a, b)
        assert result.verdict == "incomparable"
        assert not any(result.sorted_dominance.values())
        assert result.to_dict()["verdict"] == "incomparable"

    def test_enriched_wedge_lies_below_both(self, wedge, wedge_base, wedge_enriched_long):
        full = enrich_with_critical_points(wedge, wedge_base, wedge.critical_circles())
        result = compare_order(build_icp(wedge, full), build_icp(wedge, wedge_enriched_long))
        assert result.verdict == "A<=B"
        assert result.self_check

    def test_p_beyond_the_constancy_horizon(self, circle, enriched_circle_sample):
        icp = build_icp(circle, enriched_circle_sample)
        with pytest.raises(ArgumentError):
            compare_order(icp, icp, p=0.5)

    def test_p_below_r0(self, circle, circle_sample, enriched_circle_sample):
        sample_icp = build_icp(circle, circle_sample)
        enriched_icp = build_icp(circle, enriched_circle_sample)
        with pytest.raises(ArgumentError):
            compare_order(sample_icp, enriched_icp, p=0.001)
        with pytest.raises(ArgumentError):
            compare_order(sample_icp, enriched_icp, p=0.09)
        assert compare_order(sample_icp, enriched_icp, p=0.1).p == 0.1

    def test_different_models(self, circle, wedge, enriched_circle_sample, wedge_base):
        with pytest.raises(DomainError):
            compare_order(build_icp(circle, enriched_circle_sample), build_icp(wedge, wedge_base))


class TestMinimality:
    """The enriched sample is the minimum over dense samples."""

    def test_circle(self, circle, circle_sample, enriched_circle_sample):
        sparse = SampleSet(circle.model_id, (circle.point(0.0), circle.point(0.5)), 0.05)
        report = minimality_check(circle, FieldP(), 0.05, [circle_sample, sparse], enriched_circle_sample)
        assert report.realization_ok
        assert report.enriched_deaths == pytest.approx([1 / 3])
        statuses = [c["status"] for c in report.candidates]
        assert statuses == ["checked", "excluded"]
        assert report.candidates[0]["minimal"]
        assert report.candidates[0]["dominates_known"]
        assert report.passed
        assert report.to_dict()["verdict"] == "pass"

    def test_density_too_coarse(self, circle, enriched_circle_sample):
        with pytest.raises(PreconditionFailed):
            minimality_check(circle, FieldP(), 0.2, [], enriched_circle_sample)


class TestRealization:
    """H1 of the enriched sample against H1 of the space."""

    @pytest.mark.parametrize("r,rank", [(0.25, 1), (0.4, 0)])
    def test_enriched_circle(self, circle, enriched_circle_sample, r, rank):
        report = verify_realization(circle, enriched_circle_sample, r)
        assert report.isomorphism
        assert report.expected_rank == rank
        assert report.to_dict()["isomorphism"] is True


class TestRankWindows:
    """Surjectivity and isomorphism of bonding maps."""

    def test_interleaving_shadow_is_onto(self, circle, enriched_circle_sample):
        reduction = sample_reduction(circle, enriched_circle_sample)
        rows = interleaving_shadow(circle, enriched_circle_sample, reduction, grid_of(reduction))
        assert rows
        assert all(row["surjective"] for row in rows)
        assert min(row["p"] for row in rows) >= 0.1

    def test_predicted_windows_are_onto(self, circle, circle_sample):
        reduction = sample_reduction(circle, circle_sample)
        certificate = verify_density(circle, circle_sample, 0.05, 0.005)
        rows = surjectivity_windows(reduction, certificate, grid_of(reduction))
        predicted = [row for row in rows if row["predicted"]]
        assert predicted
        assert all(row["surjective"] for row in predicted)

    def test_birth_breaks_surjectivity(self, circle, circle_sample):
        reduction = sample_reduction(circle, circle_sample)
        birth = reduction.diagram.intervals[0].birth
        certificate = verify_density(circle, circle_sample, 0.05, 0.005)
        rows = surjectivity_windows(reduction, certificate, [birth / 2, birth + 0.01, 0.2])
        first = rows[0]
        assert (first["p"], first["surjective"]) == (birth / 2, False)
        assert not first["predicted"]

    def test_isomorphism_windows(self, circle, circle_sample):
        reduction = sample_reduction(circle, circle_sample)
        rows = isomorphism_windows(circle, reduction, 0.05, grid_of(reduction))
        assert rows
        assert all(row["isomorphism"] for row in rows)


class TestStabilityFigure:
    """SVG output."""

    def test_figure_is_deterministic(self, temp_dir, circle, circle_sample, enriched_circle_sample):
        sample_d = sample_reduction(circle, circle_sample).diagram
        enriched_d = sample_reduction(circle, enriched_circle_sample).diagram
        first = stability_figure(circle, sample_d, enriched_d, 0.05, temp_dir / "a.svg")
        second = stability_figure(circle, sample_d, enriched_d, 0.05, temp_dir / "b.svg")
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text().lstrip().startswith("<?xml")

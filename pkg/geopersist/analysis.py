#!/usr/bin/env python3
"""
Verification of sample persistence against the persistence of the space.

  verify_stability     — the matching a dense sample must admit: every bar of
                         the space matched to a sample bar born by 2s and dying
                         within [d, d + 2s]; all other sample bars shorter than s
  build_icp            — sample classes alive at r0 = 2s, identified inside
                         G = H1(X; F) by winding numbers of their fillings
  compare_order        — kernel-inclusion order of two such persistences
  minimality_check     — the enriched sample is the minimum over dense samples
  verify_realization   — H1(Rips(S, r)) → H1(Rips(X, r)) is an isomorphism
  surjectivity_windows / isomorphism_windows — rank checks of bonding maps

Verifiers return reports; only preconditions raise.
"""

# ── Imports ───────────────────────────────────────────────────────────────────

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.bipartite import hopcroft_karp_matching

from errors import ArgumentError, CensoredMismatch, DomainError, GeoPersistError, NotInitiallyConstant, PreconditionFailed
from homology import (
    DecoratedDiagram,
    FieldP,
    H1Reduction,
    PersistenceInterval,
    bottleneck,
    induced_map_h1,
    is_surjective,
    kernel_subspace,
)
from linalg_fp import column_space_contains, matmul_mod, rank_mod
from loops import RLoop, homology_class_of_loop
from rips import build_filtration, critical_radii, refined_grid
from sampling import DensityCertificate, SampleSet, effective_density, restrict_metric, thread_count, verify_density
from spaces import GeodesicSpaceModel, known_diagram

logger = logging.getLogger(__name__)

TOLERANCE = 1e-12


# ── Pipeline helpers ──────────────────────────────────────────────────────────

def default_rmax(model: GeodesicSpaceModel, s: float) -> float:
    """Largest known death + 3s, or half the diameter + s without a catalogue."""
    try:
        deaths = known_diagram(model).deaths()
    except GeoPersistError:
        deaths = []
    if deaths:
        return max(deaths) + 3 * s
    return model.diameter() / 2 + s


def sample_reduction(model: GeodesicSpaceModel, sample: SampleSet, field: FieldP = FieldP(),
                     rmax: Optional[float] = None) -> H1Reduction:
    """Restrict the metric, build the skeleton up to rmax and reduce it."""
    if rmax is None:
        rmax = default_rmax(model, sample.claimed_density)
    filtration = build_filtration(restrict_metric(model, sample), rmax)
    return H1Reduction(filtration, field)


def class_coordinates(model: GeodesicSpaceModel, sample: SampleSet, reduction: H1Reduction,
                      edges: Sequence[int]) -> np.ndarray:
    """Winding coordinates in G of the fundamental cycles of `edges` (one column each)."""
    columns = []
    for e in edges:
        points = tuple(sample.points[v] for v in reduction.vertex_cycle(e))
        loop = RLoop(points=points, bound=float(reduction.filtration.rmax))
        columns.append(homology_class_of_loop(model, loop, reduction.field))
    if not columns:
        return np.zeros((model.h1_rank(), 0), dtype=np.int64)
    return np.stack(columns, axis=1).astype(np.int64)


# ══════════════════════════════════════════════════════════════════════════════
#  Stability
# ══════════════════════════════════════════════════════════════════════════════

@dataclass
class StabilityReport:
    s: float
    matching: List[Tuple[int, int]] = field(default_factory=list)
    diagonal: List[int] = field(default_factory=list)
    violations: List[Dict] = field(default_factory=list)
    measured: Dict = field(default_factory=dict)
    method: str = "greedy"

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def conditions(self) -> List[int]:
        return sorted({v["condition"] for v in self.violations})

    def to_dict(self) -> Dict:
        return {
            "s": self.s,
            "verdict": self.verdict,
            "method": self.method,
            "matching": [list(pair) for pair in self.matching],
            "diagonal": list(self.diagonal),
            "violations": list(self.violations),
            "measured": dict(self.measured),
        }


def _allowed(x: PersistenceInterval, y: PersistenceInterval, s: float) -> bool:
    return (
        y.birth <= 2 * s + TOLERANCE
        and x.death - TOLERANCE <= y.death <= x.death + 2 * s + TOLERANCE
    )


def _short(y: PersistenceInterval, s: float) -> bool:
    return y.lifespan <= s + TOLERANCE


def _greedy_matching(xs, ys, s) -> Optional[List[Tuple[int, int]]]:
    pairs = []
    free = set(range(len(ys)))
    for i in sorted(range(len(xs)), key=lambda i: -xs[i].death):
        options = [j for j in free if _allowed(xs[i], ys[j], s)]
        if not options:
            return None
        j = max(options, key=lambda j: (ys[j].death, -j))
        pairs.append((i, j))
        free.discard(j)
    if any(not _short(ys[j], s) for j in free):
        return None
    return pairs


def _exhaustive_matching(xs, ys, s) -> Optional[List[Tuple[int, int]]]:
    """Every X bar to an allowed S bar, every other S bar to the diagonal."""
    g = nx.Graph()
    left = [("x", i) for i in range(len(xs))] + [("d", j) for j in range(len(ys))]
    right = [("y", j) for j in range(len(ys))] + [("free", k) for k in range(len(xs))]
    g.add_nodes_from(left, bipartite=0)
    g.add_nodes_from(right, bipartite=1)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if _allowed(x, y, s):
                g.add_edge(("x", i), ("y", j))
    for j, y in enumerate(ys):
        if _short(y, s):
            g.add_edge(("d", j), ("y", j))
        for k in range(len(xs)):
            g.add_edge(("d", j), ("free", k))
    matching = hopcroft_karp_matching(g, top_nodes=left)
    if any(node not in matching for node in left):
        return None
    return [(i, matching[("x", i)][1]) for i in range(len(xs))]


def verify_stability(diag_x: DecoratedDiagram, diag_s: DecoratedDiagram, s: float) -> StabilityReport:
    """
    Check the matching promised for an s-dense sample.

    Conditions: (1) matched sample bars are born by 2s, (2) each space bar of
    death d is matched to a sample bar dying in [d, d + 2s], (3) unmatched
    sample bars live at most s.
    """
    if not s > 0:
        raise ArgumentError(f"s must be positive, got {s}")
    if any(bar.birth != 0 for bar in diag_x.intervals):
        raise ArgumentError("space diagrams must have all births at 0")
    xs, ys = list(diag_x.intervals), list(diag_s.intervals)
    report = StabilityReport(s=float(s))

    pairs = _greedy_matching(xs, ys, s)
    if pairs is None:
        report.method = "exhaustive"
        pairs = _exhaustive_matching(xs, ys, s)

    if pairs is not None:
        report.matching = sorted(pairs)
        matched = {j for _, j in pairs}
        report.diagonal = [j for j in range(len(ys)) if j not in matched]
    else:
        report.violations = _diagnose(xs, ys, s)

    matched_births = [ys[j].birth for _, j in report.matching]
    report.measured = {
        "max_birth": max(matched_births, default=0.0),
        "death_offsets": [ys[j].death - xs[i].death for i, j in report.matching],
        "max_spurious_lifespan": max((ys[j].lifespan for j in report.diagonal), default=0.0),
    }
    try:
        report.measured["bottleneck"] = bottleneck(diag_x, diag_s)[0]
    except CensoredMismatch:
        report.measured["bottleneck"] = None
    if not report.passed:
        logger.info("stability check failed: conditions %s", report.conditions())
    return report


def _diagnose(xs, ys, s) -> List[Dict]:
    """Name the violated conditions after both matchings failed."""
    violations = []
    free = set(range(len(ys)))
    for i in sorted(range(len(xs)), key=lambda i: -xs[i].death):
        x = xs[i]
        options = [j for j in free if _allowed(x, ys[j], s)]
        if options:
            free.discard(max(options, key=lambda j: ys[j].death))
            continue
        long_bars = [j for j in free if not _short(ys[j], s)] or sorted(free)
        if not long_bars:
            violations.append({"condition": 2, "interval": i, "detail": f"no sample bar left for death {x.death:.12g}"})
            continue
        j = max(long_bars, key=lambda j: ys[j].death)
        y = ys[j]
        if y.death < x.death - TOLERANCE:
            violations.append({"condition": 2, "interval": j,
                               "detail": f"death {y.death:.12g} < {x.death:.12g} (lower bound)"})
        elif y.death > x.death + 2 * s + TOLERANCE:
            violations.append({"condition": 2, "interval": j,
                               "detail": f"death {y.death:.12g} > {x.death:.12g} + 2s (upper bound)"})
        else:
            violations.append({"condition": 1, "interval": j,
                               "detail": f"birth {y.birth:.12g} > 2s = {2 * s:.12g}"})
        free.discard(j)
    for j in sorted(free):
        if not _short(ys[j], s):
            violations.append({"condition": 3, "interval": j,
                               "detail": f"lifespan {ys[j].lifespan:.12g} > s = {s}"})
    if not violations:
        violations.append({"condition": 2, "interval": None, "detail": "no perfect matching exists"})
    return violations


# ══════════════════════════════════════════════════════════════════════════════
#  Initially constant persistences and their order
# ══════════════════════════════════════════════════════════════════════════════

@dataclass
class InitiallyConstantPersistence:
    model_id: str
    field: FieldP
    r0: float
    eps_h: float
    intervals: Tuple[PersistenceInterval, ...]
    class_coordinates: np.ndarray = field(repr=False, compare=False)
    basis_edges: Tuple[int, ...] = ()
    reduction: Optional[H1Reduction] = field(default=None, repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return self.class_coordinates.shape[0]

    def deaths(self) -> List[float]:
        return sorted((bar.death for bar in self.intervals), reverse=True)

    def to_dict(self) -> Dict:
        return {
            "r0": self.r0,
            "eps_h": self.eps_h,
            "field": self.field.p,
            "intervals": [bar.to_dict() for bar in self.intervals],
            "class_coordinates": self.class_coordinates.T.tolist(),
        }


def build_icp(model: GeodesicSpaceModel, sample: SampleSet, field: FieldP = FieldP(),
              r0: Optional[float] = None, grid: Optional[Sequence[float]] = None,
              rmax: Optional[float] = None,
              reduction: Optional[H1Reduction] = None) -> InitiallyConstantPersistence:
    """
    The persistence of the sample, started at r0 = 2s with classes identified in G.

    Raises NotInitiallyConstant if the classes alive at r0 do not form a basis of G.
    """
    s = sample.claimed_density
    r0 = 2 * s if r0 is None else r0
    try:
        critical = known_diagram(model).deaths()
    except GeoPersistError:
        critical = []
    if critical and not 2 * s < critical[0]:
        raise PreconditionFailed(f"2*{s} < {critical[0]:.12g}", "sample density must be below half the smallest critical value")
    if reduction is None:
        reduction = sample_reduction(model, sample, field, rmax)

    alive = reduction.alive_at(r0)
    coords = class_coordinates(model, sample, reduction, alive)
    dim = model.h1_rank()
    rank = rank_mod(coords, reduction.field.p)
    if len(alive) != dim or rank != dim:
        raise NotInitiallyConstant(f"{len(alive)} classes alive at r0={r0:.6g} with coordinate rank {rank}, dim G = {dim}")

    edges = reduction.filtration.edges
    by_edge = {bar.birth_edge: bar for bar in reduction.diagram.intervals}
    intervals = tuple(by_edge[edges[e]] for e in alive)
    later_births = [bar.birth for bar in reduction.diagram.intervals if bar.birth > r0]
    eps_h = min([bar.death for bar in intervals] + later_births + [reduction.filtration.rmax])
    for g in sorted(grid or ()):
        if g > r0 and len(reduction.alive_at(g)) < dim:
            eps_h = min(eps_h, g)
            break
    return InitiallyConstantPersistence(
        model_id=model.model_id,
        field=reduction.field,
        r0=float(r0),
        eps_h=float(eps_h),
        intervals=intervals,
        class_coordinates=coords,
        basis_edges=tuple(alive),
        reduction=reduction,
    )


@dataclass
class OrderComparisonResult:
    """verdict: "A<=B", "B<=A", "equal" or "incomparable"."""

    p: float
    kernel_inclusions: List[Dict] = field(default_factory=list)
    sorted_dominance: Dict[str, bool] = field(default_factory=dict)
    verdict: str = "incomparable"
    self_check: bool = True

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "verdict": self.verdict,
            "sorted_dominance": dict(self.sorted_dominance),
            "self_check": self.self_check,
            "kernel_inclusions": list(self.kernel_inclusions),
        }


def _kernel_in_g(icp: InitiallyConstantPersistence, p: float, q: float) -> np.ndarray:
    if tuple(icp.reduction.alive_at(p)) != icp.basis_edges:
        raise ArgumentError(f"classes alive at p={p} differ from the classes at r0={icp.r0}")
    basis = kernel_subspace(icp.reduction, p, q)
    return matmul_mod(icp.class_coordinates, basis, icp.field.p)


def compare_order(icp_a: InitiallyConstantPersistence, icp_b: InitiallyConstantPersistence,
                  p: Optional[float] = None, grid: Optional[Sequence[float]] = None) -> OrderComparisonResult:
    """
    Decide the kernel-inclusion order: H_A <= H_B iff ker i^B_{p,q} ⊆ ker i^A_{p,q}
    inside G for every q > p.
    """
    if icp_a.model_id != icp_b.model_id or icp_a.field != icp_b.field or icp_a.dimension != icp_b.dimension:
        raise DomainError("persistences must share the model, the field and G")
    if p is None:
        p = max(icp_a.r0, icp_b.r0)
    r0 = max(icp_a.r0, icp_b.r0)
    if not r0 <= p < min(icp_a.eps_h, icp_b.eps_h):
        raise ArgumentError(
            f"p={p} must lie in [{r0}, {min(icp_a.eps_h, icp_b.eps_h)}): at or above both r0 "
            f"({icp_a.r0}, {icp_b.r0}) and below both constancy horizons ({icp_a.eps_h}, {icp_b.eps_h})"
        )
    upper = min(icp_a.reduction.filtration.rmax, icp_b.reduction.filtration.rmax)
    if grid is None:
        radii = sorted(set(critical_radii(icp_a.reduction.filtration)) | set(critical_radii(icp_b.reduction.filtration)))
        grid = refined_grid(radii, upper)
    grid = [q for q in grid if p < q <= upper]

    prime = icp_a.field.p
    result = OrderComparisonResult(p=float(p))
    a_in_b_all, b_in_a_all = True, True
    for q in grid:
        ker_a = _kernel_in_g(icp_a, p, q)
        ker_b = _kernel_in_g(icp_b, p, q)
        a_in_b = column_space_contains(ker_b, ker_a, prime)
        b_in_a = column_space_contains(ker_a, ker_b, prime)
        a_in_b_all &= a_in_b
        b_in_a_all &= b_in_a
        result.kernel_inclusions.append({
            "q": float(q),
            "dim_ker_a": rank_mod(ker_a, prime),
            "dim_ker_b": rank_mod(ker_b, prime),
            "ker_a_in_ker_b": bool(a_in_b),
            "ker_b_in_ker_a": bool(b_in_a),
        })

    deaths_a, deaths_b = icp_a.deaths(), icp_b.deaths()
    result.sorted_dominance = {
        "A<=B": all(da <= db + TOLERANCE for da, db in zip(deaths_a, deaths_b)),
        "B<=A": all(db <= da + TOLERANCE for da, db in zip(deaths_a, deaths_b)),
    }
    if a_in_b_all and b_in_a_all:
        result.verdict = "equal"
    elif b_in_a_all:
        result.verdict = "A<=B"
    elif a_in_b_all:
        result.verdict = "B<=A"
    else:
        result.verdict = "incomparable"

    if result.verdict == "equal":
        result.self_check = result.sorted_dominance["A<=B"] and result.sorted_dominance["B<=A"]
    elif result.verdict in result.sorted_dominance:
        result.self_check = result.sorted_dominance[result.verdict]
    if not result.self_check:
        logger.warning("kernel inclusion %s without sorted dominance", result.verdict)
    return result


# ══════════════════════════════════════════════════════════════════════════════
#  Minimality
# ══════════════════════════════════════════════════════════════════════════════

@dataclass
class MinimalityReport:
    s: float
    known_deaths: List[float]
    enriched_deaths: List[float]
    realization_ok: bool
    candidates: List[Dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        checked = [c for c in self.candidates if c["status"] == "checked"]
        return self.realization_ok and all(c["minimal"] and c["dominates_known"] for c in checked)

    def to_dict(self) -> Dict:
        return {
            "s": self.s,
            "verdict": "pass" if self.passed else "fail",
            "known_deaths": list(self.known_deaths),
            "enriched_deaths": list(self.enriched_deaths),
            "realization_ok": self.realization_ok,
            "candidates": list(self.candidates),
        }


def minimality_check(model: GeodesicSpaceModel, field: FieldP, s: float,
                     candidate_samples: Sequence[SampleSet], enriched_sample: SampleSet,
                     resolution: Optional[float] = None, rmax: Optional[float] = None) -> MinimalityReport:
    """
    Check that the enriched sample realizes the space's deaths exactly and
    lies below every s-dense candidate in the kernel-inclusion order.
    Candidates failing the density probe are excluded, not failed.
    """
    known = sorted(known_diagram(model, field).deaths(), reverse=True)
    if known and not 2 * s < known[-1]:
        raise PreconditionFailed(f"2*{s} < {known[-1]:.12g}")
    resolution = s / 20 if resolution is None else resolution
    rmax = default_rmax(model, s) if rmax is None else rmax

    enriched = build_icp(model, enriched_sample, field, rmax=rmax)
    enriched_deaths = enriched.deaths()
    realization_ok = len(enriched_deaths) == len(known) and all(
        abs(a - b) <= TOLERANCE for a, b in zip(enriched_deaths, known)
    )
    report = MinimalityReport(s=float(s), known_deaths=known, enriched_deaths=enriched_deaths,
                              realization_ok=realization_ok)

    def check(indexed):
        index, candidate = indexed
        certificate = verify_density(model, candidate, s, resolution)
        if not certificate.passed:
            return {"index": index, "status": "excluded", "certificate": certificate.to_dict()}
        icp = build_icp(model, candidate, field, rmax=rmax)
        order = compare_order(enriched, icp)
        deaths = icp.deaths()
        return {
            "index": index,
            "status": "checked",
            "verdict": order.verdict,
            "minimal": order.verdict in ("A<=B", "equal"),
            "dominates_known": all(d >= k - TOLERANCE for d, k in zip(deaths, known)),
            "deaths": deaths,
        }

    workers = thread_count()
    items = list(enumerate(candidate_samples))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            report.candidates = list(pool.map(check, items))
    else:
        report.candidates = [check(item) for item in items]
    excluded = sum(1 for c in report.candidates if c["status"] == "excluded")
    if excluded:
        logger.warning("%d candidate samples excluded by the density probe", excluded)
    return report


# ══════════════════════════════════════════════════════════════════════════════
#  Realization and rank windows
# ══════════════════════════════════════════════════════════════════════════════

@dataclass
class RealizationReport:
    r: float
    expected_rank: int
    measured_rank: int
    map_rank: int

    @property
    def isomorphism(self) -> bool:
        return self.expected_rank == self.measured_rank == self.map_rank

    def to_dict(self) -> Dict:
        return {
            "r": self.r,
            "expected_rank": self.expected_rank,
            "measured_rank": self.measured_rank,
            "map_rank": self.map_rank,
            "isomorphism": self.isomorphism,
        }


def _alive_rows(model: GeodesicSpaceModel, r: float) -> List[int]:
    """Generators of G whose catalogue circle is still alive in Rips(X, r)."""
    return [k for k, circle in enumerate(model.critical_circles()) if r <= circle.length / 3]


def verify_realization(model: GeodesicSpaceModel, sample: SampleSet, r: float,
                       field: FieldP = FieldP(), reduction: Optional[H1Reduction] = None) -> RealizationReport:
    """Compare H1(Rips(S, r)) with H1(Rips(X, r)) through the class map into G."""
    if reduction is None:
        reduction = sample_reduction(model, sample, field)
    alive = reduction.alive_at(r)
    rows = _alive_rows(model, r)
    coords = class_coordinates(model, sample, reduction, alive)[rows, :]
    return RealizationReport(
        r=float(r),
        expected_rank=known_diagram(model, field).count_containing(r),
        measured_rank=len(alive),
        map_rank=rank_mod(coords, reduction.field.p),
    )


def interleaving_shadow(model: GeodesicSpaceModel, sample: SampleSet, reduction: H1Reduction,
                        grid: Sequence[float]) -> List[Dict]:
    """Rank of H1(Rips(S, p)) → H1(Rips(X, p)) for p >= 2s; full rank means onto."""
    s = sample.claimed_density
    rows_out = []
    for p in grid:
        if p < 2 * s or p > reduction.filtration.rmax:
            continue
        rows = _alive_rows(model, p)
        coords = class_coordinates(model, sample, reduction, reduction.alive_at(p))[rows, :]
        rank = rank_mod(coords, reduction.field.p)
        rows_out.append({"p": float(p), "expected": len(rows), "rank": rank, "surjective": rank == len(rows)})
    return rows_out


def surjectivity_windows(reduction: H1Reduction, certificate: DensityCertificate, grid: Sequence[float]) -> List[Dict]:
    """
    Surjectivity of i_{p,q} on consecutive grid pairs and on (p, last); maps
    compose, so consecutive pairs cover every pair. Predicted for p above
    twice the covering radius, widened by one probe step.
    """
    threshold = 2 * (effective_density(certificate) + certificate.probe_resolution)
    grid = sorted(g for g in grid if 0 < g <= reduction.filtration.rmax)
    out = []
    if len(grid) < 2:
        return out
    pairs = list(zip(grid, grid[1:])) + [(g, grid[-1]) for g in grid[:-2]]
    for p, q in pairs:
        onto, rank = is_surjective(induced_map_h1(reduction, p, q))
        out.append({"p": p, "q": q, "predicted": p > threshold, "surjective": onto, "rank": rank})
    return out


def isomorphism_windows(model: GeodesicSpaceModel, reduction: H1Reduction, s: float,
                        grid: Sequence[float]) -> List[Dict]:
    """
    Bonding maps of the sample on windows (c_k + 2s, c_{k+1}) between
    consecutive critical values of the space, where they are isomorphisms.
    """
    rmax = reduction.filtration.rmax
    critical = [0.0] + sorted(set(known_diagram(model).deaths())) + [float("inf")]
    out = []
    for lo, hi in zip(critical, critical[1:]):
        inside = sorted(g for g in grid if lo + 2 * s < g < hi and g <= rmax)
        for p, q in zip(inside, inside[1:]):
            mapping = induced_map_h1(reduction, p, q)
            rows, cols = mapping.matrix.shape
            rank = rank_mod(mapping.matrix, reduction.field.p)
            out.append({
                "window": [lo + 2 * s, hi],
                "p": p,
                "q": q,
                "isomorphism": rows == cols == rank,
            })
    return out


def stability_figure(model: GeodesicSpaceModel, sample_diagram: DecoratedDiagram,
                     enriched_diagram: DecoratedDiagram, s: float, path):
    """Classical band, intrinsic band and enriched deaths side by side (SVG)."""
    from plotting import stability_svg

    return stability_svg(known_diagram(model, sample_diagram.field), sample_diagram, enriched_diagram, s, path)

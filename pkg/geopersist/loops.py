#!/usr/bin/env python3
"""
r-loops, fillings, snapping and explicit simplicial homotopies.

An r-loop is a cyclic sequence of points with consecutive distances below r.
Its filling joins consecutive points by the tie-broken geodesics of the
model. Snapping replaces every point by its nearest sample point and turns an
r-loop into an (r + 2s)-loop of the sample.

`build_nullhomotopy` produces the triangle list that contracts a snapped
sample of a short geodesic circle: three anchors w_1, w_2, w_3 split the
circle into thirds, every loop vertex is fanned to the sample point q_j
nearest its anchor, bridge triangles join neighbouring fans and the central
triangle (q_1, q_2, q_3) closes the disk.
"""

# ── Imports ───────────────────────────────────────────────────────────────────

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    ConstructionFailed,
    DensityViolation,
    DomainError,
    PreconditionFailed,
    ValidationError,
)
from homology import FieldP
from sampling import DEDUP_TOLERANCE, DistanceMatrix, SampleSet, restrict_metric
from spaces import CriticalCircleFeature, GeodesicSpaceModel, SpacePoint

logger = logging.getLogger(__name__)

MIN_SAMPLE_SIZE = 3
WINDING_TOLERANCE = 1e-6
# Relative margin keeping rounded loop steps below delta.
SPACING_SLACK = 1e-9


# ══════════════════════════════════════════════════════════════════════════════
#  Loop types
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class RLoop:
    """Cyclic point sequence x_0 … x_k (x_{k+1} = x_0) with bound r."""

    points: Tuple[SpacePoint, ...]
    bound: float

    def __len__(self) -> int:
        return len(self.points)

    def check(self, model: GeodesicSpaceModel) -> "RLoop":
        """Raise ValidationError unless every consecutive distance is below the bound."""
        for k, x in enumerate(self.points):
            y = self.points[(k + 1) % len(self.points)]
            d = model.distance(x, y)
            if not d < self.bound:
                raise ValidationError(f"d(x_{k}, x_{k + 1}) = {d} is not below r = {self.bound}")
        return self

    def is_based(self, model: GeodesicSpaceModel) -> bool:
        return bool(self.points) and self.points[0] == model.basepoint

    def to_dict(self) -> Dict:
        return {"points": [p.to_list() for p in self.points], "bound": self.bound}


@dataclass(frozen=True)
class SampledLoop:
    """A loop through sample indices y_0 … y_k, bound r."""

    indices: Tuple[int, ...]
    bound: float

    def __len__(self) -> int:
        return len(self.indices)

    def steps(self) -> List[Tuple[int, int]]:
        """Consecutive pairs including the closing one."""
        ix = self.indices
        return [(ix[k], ix[(k + 1) % len(ix)]) for k in range(len(ix))]

    def edges(self) -> List[Tuple[int, int]]:
        """Non-degenerate steps as sorted vertex pairs."""
        return [(min(a, b), max(a, b)) for a, b in self.steps() if a != b]

    def collapsed(self) -> "SampledLoop":
        """Drop cyclic repetitions (y_i = y_{i+1})."""
        out: List[int] = []
        for v in self.indices:
            if not out or out[-1] != v:
                out.append(v)
        while len(out) > 1 and out[-1] == out[0]:
            out.pop()
        return SampledLoop(tuple(out), self.bound)

    def to_dict(self) -> Dict:
        return {"indices": list(self.indices), "bound": self.bound}


@dataclass(frozen=True)
class FilledLoop:
    """Arc-length parametrization of the piecewise-geodesic filling."""

    model: GeodesicSpaceModel = field(repr=False, compare=False)
    points: Tuple[SpacePoint, ...]
    offsets: Tuple[float, ...]
    length: float

    def __call__(self, t: float) -> SpacePoint:
        if not self.points:
            raise ValidationError("cannot evaluate an empty loop")
        if self.length == 0:
            return self.points[0]
        t = t % self.length
        k = max(0, int(np.searchsorted(self.offsets, t, side="right")) - 1)
        x = self.points[k]
        y = self.points[(k + 1) % len(self.points)]
        span = self.offsets[k + 1] - self.offsets[k] if k + 1 < len(self.offsets) else self.length - self.offsets[k]
        if span == 0:
            return x
        return self.model.geodesic_point(x, y, min(1.0, (t - self.offsets[k]) / span))


@dataclass(frozen=True)
class Lasso:
    """A geodesic approach from the basepoint to the start of a circle."""

    approach: Tuple[SpacePoint, ...]
    circle: CriticalCircleFeature


@dataclass(frozen=True)
class NullHomotopy:
    """Triangles bounding a sampled loop in Rips(S, r)."""

    interior_vertices: Tuple[int, ...]
    triangles: Tuple[Tuple[int, int, int], ...]
    boundary: SampledLoop
    r: float
    mode: str = "dense"
    circle: str = ""

    def to_dict(self) -> Dict:
        return {
            "circle": self.circle,
            "mode": self.mode,
            "r": self.r,
            "interior_vertices": list(self.interior_vertices),
            "triangles": [list(t) for t in self.triangles],
            "boundary": self.boundary.to_dict(),
        }


@dataclass(frozen=True)
class LadderHomotopy:
    """Annulus triangles between two sampled loops of equal size."""

    triangles: Tuple[Tuple[int, int, int], ...]
    first: SampledLoop
    second: SampledLoop
    bound: float


@dataclass(frozen=True)
class DiskCheck:
    passed: bool
    violation: Optional[str] = None
    max_diameter: float = 0.0

    def to_dict(self) -> Dict:
        return {"passed": self.passed, "violation": self.violation, "max_diameter": self.max_diameter}


# ══════════════════════════════════════════════════════════════════════════════
#  r-samples, fillings, snapping
# ══════════════════════════════════════════════════════════════════════════════

def r_sample_of_circle(circle: CriticalCircleFeature, delta: float) -> RLoop:
    """At least three points of the circle, evenly spaced below delta, starting at t = 0."""
    if not delta > 0:
        raise PreconditionFailed(f"{delta} > 0", "delta must be positive")
    n = max(MIN_SAMPLE_SIZE, int(math.floor(circle.length / delta)) + 1)
    while circle.length / n >= delta * (1 - SPACING_SLACK):
        n += 1
    points = tuple(circle.parametrize(m * circle.length / n) for m in range(n))
    return RLoop(points=points, bound=float(delta))


def fill(rloop: RLoop, model: GeodesicSpaceModel) -> FilledLoop:
    """Piecewise-geodesic loop through the points of `rloop`."""
    points = rloop.points
    offsets = [0.0]
    for k, x in enumerate(points):
        offsets.append(offsets[-1] + model.distance(x, points[(k + 1) % len(points)]))
    return FilledLoop(model=model, points=points, offsets=tuple(offsets[:-1]), length=offsets[-1])


def snap_to_sample(model: GeodesicSpaceModel, rloop: RLoop, sample: SampleSet,
                   collapse: bool = False) -> SampledLoop:
    """
    Replace each x_i by the nearest sample point (lowest index on ties).

    Raises DensityViolation if some x_i is not within the sample's claimed
    density s of the sample.
    """
    if sample.model_id != model.model_id:
        raise DomainError("sample belongs to a different model")
    s = sample.claimed_density
    table = model.pairwise_distances(list(rloop.points), list(sample.points))
    nearest = np.argmin(table, axis=1)
    gaps = table[np.arange(len(rloop.points)), nearest]
    worst = int(np.argmax(gaps)) if len(gaps) else 0
    if len(gaps) and not gaps[worst] < s:
        raise DensityViolation(f"d(x_{worst}, S) = {gaps[worst]:.6g} is not below s = {s}", "sample is not dense enough")
    snapped = SampledLoop(tuple(int(i) for i in nearest), rloop.bound + 2 * s)
    return snapped.collapsed() if collapse else snapped


def concatenate(first: RLoop, second: RLoop) -> RLoop:
    """L * L' for loops starting at the same point."""
    if first.points[0] != second.points[0]:
        raise DomainError("concatenated loops must start at the same point")
    return RLoop(points=first.points + second.points, bound=max(first.bound, second.bound))


def close_loops_homotopic(model: GeodesicSpaceModel, first: RLoop, second: RLoop, r: float) -> bool:
    """
    Sufficient criterion for two r-loops of equal size to be r-homotopic:
    max d(x_i, y_i) < r − (largest consecutive distance of either loop).
    """
    if len(first) != len(second):
        return False
    step = 0.0
    for loop in (first, second):
        for k, x in enumerate(loop.points):
            step = max(step, model.distance(x, loop.points[(k + 1) % len(loop)]))
    drift = max(model.distance(x, y) for x, y in zip(first.points, second.points))
    return drift < r - step


# ── Lassos ────────────────────────────────────────────────────────────────────

def make_lasso(model: GeodesicSpaceModel, circle: CriticalCircleFeature, steps: int = 8) -> Lasso:
    """Geodesic approach from the basepoint to parametrize(0), in `steps` equal parts."""
    if circle.model_id != model.model_id:
        raise DomainError(f"circle {circle.label} belongs to another model")
    start = circle.parametrize(0.0)
    if model.distance(model.basepoint, start) < DEDUP_TOLERANCE:
        return Lasso(approach=(model.basepoint,), circle=circle)
    steps = max(1, int(steps))
    approach = tuple(model.geodesic_point(model.basepoint, start, k / steps) for k in range(steps + 1))
    return Lasso(approach=approach, circle=circle)


def lasso_loop(model: GeodesicSpaceModel, lasso: Lasso, delta: float) -> RLoop:
    """The based delta-loop α * γ * α⁻ of a lasso."""
    base, start = lasso.approach[0], lasso.approach[-1]
    length = model.distance(base, start)
    steps = int(math.floor(length / delta)) + 1 if length > 0 else 0
    while steps and length / steps >= delta * (1 - SPACING_SLACK):
        steps += 1
    approach = [model.geodesic_point(base, start, k / steps) for k in range(steps)] if steps else []
    circle_points = list(r_sample_of_circle(lasso.circle, delta).points)
    back = approach[::-1][:-1] if approach else []
    points = approach + circle_points + [start] + back if approach else circle_points
    return RLoop(points=tuple(points), bound=float(delta))


# ── Homology classes of fillings ──────────────────────────────────────────────

def homology_class_of_loop(model: GeodesicSpaceModel, loop, field: FieldP = FieldP()) -> np.ndarray:
    """
    Winding numbers of the filled loop around each generator of H1(X), mod p.

    Accepts an RLoop or FilledLoop; metric graphs raise UnsupportedModel.
    """
    points = loop.points
    total = np.zeros(model.h1_rank())
    for k, x in enumerate(points):
        total = total + model.winding_increment(x, points[(k + 1) % len(points)])
    rounded = np.rint(total)
    if np.any(np.abs(total - rounded) > WINDING_TOLERANCE):
        raise ValidationError(f"filled loop does not close up: winding {total}")
    return np.mod(rounded.astype(np.int64), field.p)


# ══════════════════════════════════════════════════════════════════════════════
#  Simplicial homotopies
# ══════════════════════════════════════════════════════════════════════════════

def _nearest_index(model: GeodesicSpaceModel, x: SpacePoint, sample: SampleSet) -> Tuple[int, float]:
    row = model.pairwise_distances([x], list(sample.points))[0]
    k = int(np.argmin(row))
    return k, float(row[k])


def _arc_gap(a: float, b: float, length: float) -> float:
    d = abs(a - b) % length
    return min(d, length - d)


def build_nullhomotopy(model: GeodesicSpaceModel, circle: CriticalCircleFeature, sample: SampleSet,
                       r: float, s: float, mode: str = "dense", delta: Optional[float] = None,
                       dmatrix: Optional[DistanceMatrix] = None) -> NullHomotopy:
    """
    Contract the snapped delta-sample of a short circle inside Rips(S, r).

    Args:
        model: The space.
        circle: Circle of length a to contract.
        sample: s-dense sample containing the basepoint.
        r: Target parameter; needs r > delta + 2s.
        s: Density of the sample.
        mode: "dense" (needs a < 3(r − 2s)) or "equidistant" (needs a < 3r
            and the three points parametrize(0), (a/3), (2a/3) in the sample).
        delta: Spacing bound of the circle sample; defaults to (r − 2s)/2.
        dmatrix: Restricted metric of the sample, computed when omitted.

    Returns:
        NullHomotopy whose triangles all have diameter below r.
    """
    if circle.model_id != sample.model_id or sample.model_id != model.model_id:
        raise DomainError(f"circle {circle.label} and sample belong to different models")
    if mode not in ("dense", "equidistant"):
        raise PreconditionFailed(f"mode in {{dense, equidistant}}", f"got {mode!r}")
    a = circle.length
    if delta is None:
        delta = (r - 2 * s) / 2
    if not delta > 0:
        raise PreconditionFailed(f"{delta} > 0", "delta must be positive")
    if not r > delta + 2 * s:
        raise PreconditionFailed(f"{r} > {delta} + 2*{s}")
    if mode == "dense" and not a < 3 * (r - 2 * s):
        raise PreconditionFailed(f"{a} < 3*({r} - 2*{s})")
    if mode == "equidistant" and not a < 3 * r:
        raise PreconditionFailed(f"{a} < 3*{r}")

    anchors = [circle.parametrize(j * a / 3) for j in range(3)]
    nearest = [_nearest_index(model, w, sample) for w in anchors]
    if mode == "equidistant" and any(gap >= DEDUP_TOLERANCE for _, gap in nearest):
        raise PreconditionFailed(f"sample contains three equidistant points on {circle.label}")
    for j, (_, gap) in enumerate(nearest):
        if not gap < s:
            raise DensityViolation(f"d(w_{j + 1}, S) = {gap:.6g} is not below s = {s}", "sample is not dense enough")
    q = [k for k, _ in nearest]

    rloop = r_sample_of_circle(circle, delta)
    snapped = snap_to_sample(model, rloop, SampleSet(
        model_id=sample.model_id, points=sample.points, claimed_density=s,
        seed=sample.seed, enriched_circles=sample.enriched_circles,
    ))
    y = snapped.indices
    n = len(y)
    arc = [m * a / n for m in range(n)]

    # Transition vertices: loop vertex nearest each midpoint between anchors.
    midpoints = (a / 6, a / 2, 5 * a / 6)
    transition = [min(range(n), key=lambda m: (_arc_gap(arc[m], mid, a), m)) for mid in midpoints]
    t12, t23, t31 = transition
    sectors = [(t31, t12), (t12, t23), (t23, t31)]
    if sum((end - start) % n for start, end in sectors) != n:
        raise ConstructionFailed(f"transition vertices {transition} are not in cyclic order for n={n}")

    triangles: List[Tuple[int, int, int]] = []
    for j, (start, end) in enumerate(sectors):
        for step in range((end - start) % n):
            l = (start + step) % n
            triangles.append((y[l], y[(l + 1) % n], q[j]))
        triangles.append((y[end], q[j], q[(j + 1) % 3]))
    triangles.append((q[0], q[1], q[2]))
    triangles = [t for t in triangles if len(set(t)) == 3]

    nh = NullHomotopy(
        interior_vertices=tuple(q),
        triangles=tuple(triangles),
        boundary=SampledLoop(y, float(r)),
        r=float(r),
        mode=mode,
        circle=circle.label,
    )
    if dmatrix is None:
        dmatrix = restrict_metric(model, sample)
    for t in nh.triangles:
        diam = _triangle_diameter(dmatrix, t)
        if not diam < r:
            raise ConstructionFailed(f"triangle {t} has diameter {diam} >= r = {r}")
    logger.debug("nullhomotopy of %s: %d loop vertices, %d triangles", circle.label, n, len(nh.triangles))
    return nh


def _triangle_diameter(dmatrix: DistanceMatrix, t: Tuple[int, int, int]) -> float:
    a, b, c = t
    return float(max(dmatrix[a, b], dmatrix[a, c], dmatrix[b, c]))


def _mod2_edges(pairs) -> set:
    counts = Counter((min(a, b), max(a, b)) for a, b in pairs if a != b)
    return {e for e, k in counts.items() if k % 2}


def verify_disk(triangles: Sequence[Tuple[int, int, int]], boundary_loops: Sequence[SampledLoop],
                dmatrix: DistanceMatrix, r: float) -> DiskCheck:
    """
    Check (a) every triangle has diameter below r and (b) the mod-2 edge
    boundary of the triangles equals the mod-2 edge sum of the loops.
    """
    largest = 0.0
    for t in triangles:
        diam = _triangle_diameter(dmatrix, t)
        largest = max(largest, diam)
        if not diam < r:
            return DiskCheck(False, f"(a) triangle {tuple(t)} has diameter {diam:.12g} >= r = {r}", largest)
    from_triangles = _mod2_edges(
        pair for a, b, c in triangles for pair in ((a, b), (b, c), (a, c))
    )
    from_loops = _mod2_edges(step for loop in boundary_loops for step in loop.steps())
    if from_triangles != from_loops:
        extra = sorted(from_triangles ^ from_loops)[:3]
        return DiskCheck(False, f"(b) boundary mismatch at edges {extra}", largest)
    return DiskCheck(True, None, largest)


def verify_nullhomotopy(nh: NullHomotopy, dmatrix: DistanceMatrix, r: float) -> DiskCheck:
    return verify_disk(nh.triangles, [nh.boundary], dmatrix, r)


def ladder_homotopy(first: SampledLoop, second: SampledLoop, bound: float) -> LadderHomotopy:
    """
    Annulus (y_i, y'_i, y'_{i+1}), (y_i, y_{i+1}, y'_{i+1}) between two
    snappings of the same loop.
    """
    if len(first) != len(second):
        raise ValidationError("ladder homotopy needs loops of equal size")
    y, z = first.indices, second.indices
    n = len(y)
    triangles = []
    for i in range(n):
        j = (i + 1) % n
        triangles.append((y[i], z[i], z[j]))
        triangles.append((y[i], y[j], z[j]))
    triangles = [t for t in triangles if len(set(t)) == 3]
    return LadderHomotopy(tuple(triangles), first, second, float(bound))


def verify_ladder(ladder: LadderHomotopy, dmatrix: DistanceMatrix) -> DiskCheck:
    return verify_disk(ladder.triangles, [ladder.first, ladder.second], dmatrix, ladder.bound)

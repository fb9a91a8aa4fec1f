#!/usr/bin/env python3
"""
Exact models of compact geodesic spaces.

Four model kinds, each with closed-form geodesic distances:

  circle  — a circle of circumference c, points are arc positions in [0, c)
  wedge   — circles of lengths l_1..l_k glued at one point, points are
            (petal index, arc position); the wedge point is (0, 0.0)
  torus   — the flat torus [0, w) x [0, h) with the Euclidean metric of the
            nearest lattice translate
  graph   — a connected metric graph, points are (edge id, offset)

Geodesic tie-break: when two geodesics join a pair of points (antipodal points
on a circle factor), the positively oriented arc is used on circles and
petals, and the translate with the lexicographically smallest displacement
vector on the torus. Fillings, snapping and winding numbers all follow this
single choice.

Circle, wedge and torus models carry an analytic catalogue of geodesic
circles; their lengths l_i give the critical values l_i/3 of the H1
persistence of the space.
"""

# ── Imports ───────────────────────────────────────────────────────────────────

import hashlib
import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from errors import DomainError, ModelFileError, NoAnalyticCatalogue, UnsupportedModel, ValidationError

logger = logging.getLogger(__name__)

# Ties between competing geodesics are resolved below this relative gap.
TIE_TOLERANCE = 1e-12


# ── Points, charts and circles ────────────────────────────────────────────────

@dataclass(frozen=True)
class SpacePoint:
    """A point of a model; `coords` lie in the model's fundamental domain."""

    model_id: str
    coords: Tuple[float, ...]

    def to_list(self) -> List[float]:
        return list(self.coords)


@dataclass(frozen=True)
class Chart:
    """
    A parametrization used for sampling and density probes.

    `lengths` has one entry per parameter; `periodic[d]` says whether
    parameter d wraps (circles, petals, torus axes) or includes both ends
    (graph edges).
    """

    label: str
    lengths: Tuple[float, ...]
    periodic: Tuple[bool, ...]
    to_point: Callable[[Tuple[float, ...]], SpacePoint] = field(compare=False, repr=False)


@dataclass(frozen=True)
class CriticalCircleFeature:
    """An isometrically embedded circle of the model, parametrized by arc length."""

    label: str
    length: float
    model_id: str
    embed: Callable[[float], SpacePoint] = field(compare=False, repr=False)

    def parametrize(self, t: float) -> SpacePoint:
        return self.embed(_wrap(float(t), self.length))


def _wrap(t: float, period: float) -> float:
    """t mod period, kept strictly inside [0, period)."""
    r = math.fmod(t, period)
    if r < 0:
        r += period
    if r >= period:
        r = 0.0
    return r


def _wrap_array(t: np.ndarray, period: float) -> np.ndarray:
    r = np.mod(t, period)
    return np.where(r >= period, 0.0, r)


def _check_length(name: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be positive and finite, got {value!r}")
    return value


def _circle_step(x: float, y: float, c: float) -> float:
    """Signed arc increment of the tie-broken geodesic x → y on a circle of length c."""
    forward = _wrap(y - x, c)
    backward = c - forward
    if forward <= backward:
        return forward
    return -backward


# ══════════════════════════════════════════════════════════════════════════════
#  GeodesicSpaceModel — common interface of all models
# ══════════════════════════════════════════════════════════════════════════════

class GeodesicSpaceModel(ABC):
    """
    A compact geodesic space with closed-form distances.

    Subclasses implement the metric, the tie-broken geodesic and, where
    analytic, the winding increments and the circle catalogue.
    """

    kind: str = ""

    def __init__(self):
        self._model_id: Optional[str] = None

    # ── Identity and serialization ───────────────────────────────────────────

    @abstractmethod
    def to_dict(self) -> Dict:
        """The model description as it appears in a model file."""

    @property
    def model_id(self) -> str:
        """Stable identifier: kind plus a digest of the canonical description."""
        if self._model_id is None:
            canonical = json.dumps(self.to_dict(), sort_keys=True)
            digest = hashlib.sha1(canonical.encode("utf-8")).hexdigest()[:12]
            self._model_id = f"{self.kind}-{digest}"
        return self._model_id

    @property
    @abstractmethod
    def basepoint(self) -> SpacePoint:
        """The basepoint •."""

    @abstractmethod
    def point(self, *coords) -> SpacePoint:
        """Build (and canonicalize) a point of this model."""

    def point_from_list(self, coords: Sequence) -> SpacePoint:
        return self.point(*coords)

    def check_point(self, x: SpacePoint):
        if x.model_id != self.model_id:
            raise DomainError(f"point of model {x.model_id} used with model {self.model_id}")

    # ── Metric ────────────────────────────────────────────────────────────────

    @abstractmethod
    def _distance(self, x: SpacePoint, y: SpacePoint) -> float:
        ...

    def distance(self, x: SpacePoint, y: SpacePoint) -> float:
        self.check_point(x)
        self.check_point(y)
        return self._distance(x, y)

    def pairwise_distances(self, xs: Sequence[SpacePoint], ys: Sequence[SpacePoint]) -> np.ndarray:
        """Distance table of shape (len(xs), len(ys))."""
        for x in xs:
            self.check_point(x)
        for y in ys:
            self.check_point(y)
        if not xs or not ys:
            return np.zeros((len(xs), len(ys)))
        return self._pairwise(xs, ys)

    def _pairwise(self, xs, ys) -> np.ndarray:
        out = np.empty((len(xs), len(ys)))
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out[i, j] = self._distance(x, y)
        return out

    @abstractmethod
    def diameter(self) -> float:
        ...

    # ── Geodesics ─────────────────────────────────────────────────────────────

    @abstractmethod
    def _geodesic_point(self, x: SpacePoint, y: SpacePoint, t: float) -> SpacePoint:
        ...

    def geodesic_point(self, x: SpacePoint, y: SpacePoint, t: float) -> SpacePoint:
        """The point at fraction t along the tie-broken geodesic from x to y."""
        self.check_point(x)
        self.check_point(y)
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"geodesic fraction must lie in [0, 1], got {t}")
        if t == 0.0:
            return x
        if t == 1.0:
            return y
        return self._geodesic_point(x, y, t)

    def winding_increment(self, x: SpacePoint, y: SpacePoint) -> np.ndarray:
        """
        Contribution of the geodesic x → y to the winding numbers of a loop,
        in units of full turns (one entry per generator of H1 of the model).
        """
        raise UnsupportedModel(f"no winding coordinates on {self.kind} models")

    # ── Catalogue and charts ──────────────────────────────────────────────────

    def critical_circles(self) -> List[CriticalCircleFeature]:
        raise NoAnalyticCatalogue(
            f"{self.kind} models have no analytic circle catalogue; "
            "use a refined-sample oracle instead"
        )

    @abstractmethod
    def h1_rank(self) -> int:
        """Dimension of G = H1(X; F)."""

    @abstractmethod
    def charts(self) -> List[Chart]:
        ...


# ══════════════════════════════════════════════════════════════════════════════
#  Circle
# ══════════════════════════════════════════════════════════════════════════════

class Circle(GeodesicSpaceModel):
    """A circle of circumference c with the arc-length metric."""

    kind = "circle"

    def __init__(self, circumference: float):
        super().__init__()
        self.c = _check_length("circumference", circumference)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "circumference": self.c}

    @property
    def basepoint(self) -> SpacePoint:
        return self.point(0.0)

    def point(self, t) -> SpacePoint:
        t = float(t)
        if not math.isfinite(t):
            raise ValidationError(f"non-finite circle coordinate {t!r}")
        return SpacePoint(self.model_id, (_wrap(t, self.c),))

    def _distance(self, x, y) -> float:
        forward = _wrap(y.coords[0] - x.coords[0], self.c)
        return min(forward, self.c - forward)

    def _pairwise(self, xs, ys) -> np.ndarray:
        a = np.array([x.coords[0] for x in xs])[:, None]
        b = np.array([y.coords[0] for y in ys])[None, :]
        forward = _wrap_array(b - a, self.c)
        return np.minimum(forward, self.c - forward)

    def diameter(self) -> float:
        return self.c / 2

    def _geodesic_point(self, x, y, t) -> SpacePoint:
        step = _circle_step(x.coords[0], y.coords[0], self.c)
        return self.point(x.coords[0] + t * step)

    def winding_increment(self, x, y) -> np.ndarray:
        self.check_point(x)
        self.check_point(y)
        return np.array([_circle_step(x.coords[0], y.coords[0], self.c) / self.c])

    def critical_circles(self) -> List[CriticalCircleFeature]:
        return [CriticalCircleFeature("circle", self.c, self.model_id, self.point)]

    def h1_rank(self) -> int:
        return 1

    def charts(self) -> List[Chart]:
        return [Chart("circle", (self.c,), (True,), lambda params: self.point(params[0]))]


# ══════════════════════════════════════════════════════════════════════════════
#  WedgeOfCircles
# ══════════════════════════════════════════════════════════════════════════════

class WedgeOfCircles(GeodesicSpaceModel):
    """
    Circles (petals) of lengths l_1..l_k glued at the wedge point.

    A point is (petal, t) with t in [0, l_petal); t = 0 on any petal is the
    wedge point, always stored as (0, 0.0). An empty wedge is a single point.
    """

    kind = "wedge"

    def __init__(self, lengths: Sequence[float]):
        super().__init__()
        self.lengths = tuple(_check_length(f"lengths[{i}]", l) for i, l in enumerate(lengths))

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "lengths": list(self.lengths)}

    @property
    def basepoint(self) -> SpacePoint:
        return SpacePoint(self.model_id, (0, 0.0))

    def point(self, petal, t=0.0) -> SpacePoint:
        petal = int(petal)
        t = float(t)
        if not math.isfinite(t):
            raise ValidationError(f"non-finite petal coordinate {t!r}")
        if not self.lengths:
            return self.basepoint
        if not 0 <= petal < len(self.lengths):
            raise DomainError(f"petal index {petal} out of range for {len(self.lengths)} petals")
        t = _wrap(t, self.lengths[petal])
        if t == 0.0:
            return self.basepoint
        return SpacePoint(self.model_id, (petal, t))

    # ── Helpers ───────────────────────────────────────────────────────────────

    def _to_hub(self, petal: int, t: float) -> float:
        """Signed increment along the petal from t to the wedge point."""
        l = self.lengths[petal]
        return -t if t < l - t else l - t

    def _hub_distance(self, petal: int, t: float) -> float:
        return min(t, self.lengths[petal] - t)

    def _shared_petal(self, x, y) -> Optional[int]:
        """The petal both points lie on (the wedge point lies on every petal)."""
        px, tx = x.coords
        py, ty = y.coords
        if tx == 0.0:
            return py
        if ty == 0.0 or px == py:
            return px
        return None

    # ── Metric ────────────────────────────────────────────────────────────────

    def _distance(self, x, y) -> float:
        if not self.lengths:
            return 0.0
        petal = self._shared_petal(x, y)
        if petal is not None:
            l = self.lengths[petal]
            forward = _wrap(y.coords[1] - x.coords[1], l)
            return min(forward, l - forward)
        return self._hub_distance(*x.coords) + self._hub_distance(*y.coords)

    def _pairwise(self, xs, ys) -> np.ndarray:
        if not self.lengths:
            return np.zeros((len(xs), len(ys)))
        lengths = np.array(self.lengths)
        px = np.array([x.coords[0] for x in xs])[:, None]
        tx = np.array([x.coords[1] for x in xs])[:, None]
        py = np.array([y.coords[0] for y in ys])[None, :]
        ty = np.array([y.coords[1] for y in ys])[None, :]
        hub_x = np.minimum(tx, lengths[px] - tx)
        hub_y = np.minimum(ty, lengths[py] - ty)
        across = hub_x + hub_y
        # Same-petal arcs; the wedge point (t = 0) shares every petal.
        shared = np.where(tx == 0.0, py, px)
        l = lengths[shared]
        forward = np.mod(ty - tx, l)
        forward = np.where(forward >= l, 0.0, forward)
        along = np.minimum(forward, l - forward)
        same = (px == py) | (tx == 0.0) | (ty == 0.0)
        return np.where(same, along, across)

    def diameter(self) -> float:
        halves = sorted((l / 2 for l in self.lengths), reverse=True)
        return sum(halves[:2])

    # ── Geodesics ─────────────────────────────────────────────────────────────

    def _legs(self, x, y) -> List[Tuple[int, float, float]]:
        """The geodesic x → y as legs (petal, start position, signed increment)."""
        petal = self._shared_petal(x, y)
        if petal is not None:
            start = x.coords[1]
            return [(petal, start, _circle_step(start, y.coords[1], self.lengths[petal]))]
        (px, tx), (py, ty) = x.coords, y.coords
        first = (px, tx, self._to_hub(px, tx))
        second = (py, 0.0, -self._to_hub(py, ty))
        return [first, second]

    def _geodesic_point(self, x, y, t) -> SpacePoint:
        if not self.lengths:
            return self.basepoint
        remaining = t * self._distance(x, y)
        legs = self._legs(x, y)
        for index, (petal, start, step) in enumerate(legs):
            if remaining <= abs(step) or index == len(legs) - 1:
                return self.point(petal, start + math.copysign(min(remaining, abs(step)), step))
            remaining -= abs(step)
        return y

    def winding_increment(self, x, y) -> np.ndarray:
        self.check_point(x)
        self.check_point(y)
        turns = np.zeros(len(self.lengths))
        if not self.lengths:
            return turns
        for petal, _, step in self._legs(x, y):
            turns[petal] += step / self.lengths[petal]
        return turns

    # ── Catalogue and charts ──────────────────────────────────────────────────

    def critical_circles(self) -> List[CriticalCircleFeature]:
        return [
            CriticalCircleFeature(f"petal-{i}", l, self.model_id, lambda t, i=i: self.point(i, t))
            for i, l in enumerate(self.lengths)
        ]

    def h1_rank(self) -> int:
        return len(self.lengths)

    def charts(self) -> List[Chart]:
        return [
            Chart(f"petal-{i}", (l,), (True,), lambda params, i=i: self.point(i, params[0]))
            for i, l in enumerate(self.lengths)
        ]


# ══════════════════════════════════════════════════════════════════════════════
#  FlatTorus
# ══════════════════════════════════════════════════════════════════════════════

class FlatTorus(GeodesicSpaceModel):
    """The flat torus [0, w) x [0, h)."""

    kind = "torus"

    def __init__(self, w: float, h: float):
        super().__init__()
        self.w = _check_length("w", w)
        self.h = _check_length("h", h)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "w": self.w, "h": self.h}

    @property
    def basepoint(self) -> SpacePoint:
        return self.point(0.0, 0.0)

    def point(self, u, v) -> SpacePoint:
        u, v = float(u), float(v)
        if not (math.isfinite(u) and math.isfinite(v)):
            raise ValidationError(f"non-finite torus coordinates ({u!r}, {v!r})")
        return SpacePoint(self.model_id, (_wrap(u, self.w), _wrap(v, self.h)))

    def displacement(self, x: SpacePoint, y: SpacePoint) -> Tuple[float, float]:
        """
        Displacement to the nearest lattice translate of y (9 candidates),
        lexicographically smallest among ties.
        """
        du = y.coords[0] - x.coords[0]
        dv = y.coords[1] - x.coords[1]
        candidates = [
            (du + a * self.w, dv + b * self.h) for a in (-1, 0, 1) for b in (-1, 0, 1)
        ]
        norms = [math.hypot(cu, cv) for cu, cv in candidates]
        best = min(norms)
        slack = TIE_TOLERANCE * max(1.0, best)
        return min(c for c, n in zip(candidates, norms) if n <= best + slack)

    def _distance(self, x, y) -> float:
        return math.hypot(*self.displacement(x, y))

    def _pairwise(self, xs, ys) -> np.ndarray:
        u1 = np.array([x.coords[0] for x in xs])[:, None]
        v1 = np.array([x.coords[1] for x in xs])[:, None]
        u2 = np.array([y.coords[0] for y in ys])[None, :]
        v2 = np.array([y.coords[1] for y in ys])[None, :]
        du = np.abs(u2 - u1)
        dv = np.abs(v2 - v1)
        du = np.minimum(du, self.w - du)
        dv = np.minimum(dv, self.h - dv)
        return np.hypot(du, dv)

    def diameter(self) -> float:
        return math.hypot(self.w / 2, self.h / 2)

    def _geodesic_point(self, x, y, t) -> SpacePoint:
        du, dv = self.displacement(x, y)
        return self.point(x.coords[0] + t * du, x.coords[1] + t * dv)

    def winding_increment(self, x, y) -> np.ndarray:
        self.check_point(x)
        self.check_point(y)
        du, dv = self.displacement(x, y)
        return np.array([du / self.w, dv / self.h])

    def critical_circles(self) -> List[CriticalCircleFeature]:
        # Axis loops only; diagonal circles are left to refined-sample oracles.
        return [
            CriticalCircleFeature("axis-u", self.w, self.model_id, lambda t: self.point(t, 0.0)),
            CriticalCircleFeature("axis-v", self.h, self.model_id, lambda t: self.point(0.0, t)),
        ]

    def h1_rank(self) -> int:
        return 2

    def charts(self) -> List[Chart]:
        return [Chart("torus", (self.w, self.h), (True, True), lambda params: self.point(*params))]


# ══════════════════════════════════════════════════════════════════════════════
#  MetricGraph
# ══════════════════════════════════════════════════════════════════════════════

class MetricGraph(GeodesicSpaceModel):
    """
    A connected graph with positive edge lengths; points are (edge id, offset)
    with offset in [0, length], measured from the edge's first vertex.
    """

    kind = "graph"

    def __init__(self, vertices: int, edges: Sequence[Sequence], basepoint: Sequence = (0, 0.0)):
        super().__init__()
        self.n_vertices = int(vertices)
        if self.n_vertices < 1:
            raise ValidationError("a metric graph needs at least one vertex")
        parsed = []
        for index, edge in enumerate(edges):
            if len(edge) != 3:
                raise ValidationError(f"edge {index} must be [u, v, length], got {edge!r}")
            u, v, length = int(edge[0]), int(edge[1]), _check_length(f"edges[{index}].length", edge[2])
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValidationError(f"edge {index} references a vertex outside 0..{self.n_vertices - 1}")
            parsed.append((u, v, length))
        if not parsed:
            raise ValidationError("a metric graph needs at least one edge")
        self.edges = tuple(parsed)
        self._base_coords = (int(basepoint[0]), float(basepoint[1]))
        self._all_pairs()
        self.basepoint_point = self.point(*self._base_coords)

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "vertices": self.n_vertices,
            "edges": [[u, v, length] for u, v, length in self.edges],
            "basepoint": [self._base_coords[0], self._base_coords[1]],
        }

    # ── Vertex distances ──────────────────────────────────────────────────────

    def _all_pairs(self):
        """Dijkstra from every vertex; parallel edges keep their shortest copy."""
        dense = np.full((self.n_vertices, self.n_vertices), np.inf)
        for u, v, length in self.edges:
            if u != v and length < dense[u, v]:
                dense[u, v] = dense[v, u] = length
        graph = csgraph_from_dense(dense, null_value=np.inf)
        self.vertex_dist, self.predecessors = shortest_path(
            graph, method="D", directed=False, return_predecessors=True
        )
        if np.isinf(self.vertex_dist).any():
            raise ValidationError("metric graph is not connected")

    @property
    def basepoint(self) -> SpacePoint:
        return self.basepoint_point

    def point(self, edge, offset=0.0) -> SpacePoint:
        edge, offset = int(edge), float(offset)
        if not 0 <= edge < len(self.edges):
            raise DomainError(f"edge id {edge} out of range for {len(self.edges)} edges")
        length = self.edges[edge][2]
        if not math.isfinite(offset) or not -TIE_TOLERANCE <= offset <= length + TIE_TOLERANCE:
            raise DomainError(f"offset {offset} outside [0, {length}] on edge {edge}")
        return SpacePoint(self.model_id, (edge, min(max(offset, 0.0), length)))

    def _options(self, x, y) -> List[Tuple[float, str]]:
        """Candidate route lengths in tie-break order: direct, then a-c, a-d, b-c, b-d."""
        (e, o), (f, p) = x.coords, y.coords
        a, b, L = self.edges[e]
        c, d, M = self.edges[f]
        D = self.vertex_dist
        options = []
        if e == f:
            options.append((abs(o - p), "direct"))
        options += [
            (o + D[a, c] + p, "ac"),
            (o + D[a, d] + (M - p), "ad"),
            ((L - o) + D[b, c] + p, "bc"),
            ((L - o) + D[b, d] + (M - p), "bd"),
        ]
        return options

    def _distance(self, x, y) -> float:
        return float(min(length for length, _ in self._options(x, y)))

    def _pairwise(self, xs, ys) -> np.ndarray:
        edges = np.array([[u, v, l] for u, v, l in self.edges])
        ex = np.array([x.coords[0] for x in xs], dtype=int)[:, None]
        ox = np.array([x.coords[1] for x in xs])[:, None]
        ey = np.array([y.coords[0] for y in ys], dtype=int)[None, :]
        oy = np.array([y.coords[1] for y in ys])[None, :]
        a, b, L = edges[ex, 0].astype(int), edges[ex, 1].astype(int), edges[ex, 2]
        c, d, M = edges[ey, 0].astype(int), edges[ey, 1].astype(int), edges[ey, 2]
        D = self.vertex_dist
        best = np.minimum.reduce([
            ox + D[a, c] + oy,
            ox + D[a, d] + (M - oy),
            (L - ox) + D[b, c] + oy,
            (L - ox) + D[b, d] + (M - oy),
        ])
        return np.where(ex == ey, np.minimum(best, np.abs(ox - oy)), best)

    def diameter(self) -> float:
        """Probe estimate: every edge sampled at 32 evenly spaced offsets."""
        probes = [
            self.point(e, k * length / 32) for e, (_, _, length) in enumerate(self.edges) for k in range(33)
        ]
        return float(self._pairwise(probes, probes).max())

    # ── Geodesics ─────────────────────────────────────────────────────────────

    def _shortest_edge(self, u: int, v: int) -> int:
        candidates = [
            (length, index) for index, (a, b, length) in enumerate(self.edges) if {a, b} == {u, v}
        ]
        return min(candidates)[1]

    def _vertex_route(self, source: int, target: int) -> List[int]:
        route = [target]
        while route[-1] != source:
            route.append(int(self.predecessors[source, route[-1]]))
        return route[::-1]

    def _legs(self, x, y) -> List[Tuple[int, float, float]]:
        """The geodesic x → y as legs (edge, start offset, end offset)."""
        length, how = min(self._options(x, y), key=lambda option: option[0])
        (e, o), (f, p) = x.coords, y.coords
        if how == "direct":
            return [(e, o, p)]
        a, b, L = self.edges[e]
        c, d, M = self.edges[f]
        start_vertex = a if how[0] == "a" else b
        end_vertex = c if how[1] == "c" else d
        legs = [(e, o, 0.0 if how[0] == "a" else L)]
        route = self._vertex_route(start_vertex, end_vertex)
        for u, v in zip(route, route[1:]):
            index = self._shortest_edge(u, v)
            eu, _, el = self.edges[index]
            legs.append((index, 0.0, el) if eu == u else (index, el, 0.0))
        legs.append((f, 0.0 if how[1] == "c" else M, p))
        return legs

    def _geodesic_point(self, x, y, t) -> SpacePoint:
        remaining = t * self._distance(x, y)
        for edge, start, end in self._legs(x, y):
            span = abs(end - start)
            if remaining <= span:
                return self.point(edge, start + math.copysign(remaining, end - start))
            remaining -= span
        return y

    def h1_rank(self) -> int:
        return len(self.edges) - self.n_vertices + 1

    def charts(self) -> List[Chart]:
        return [
            Chart(f"edge-{e}", (length,), (False,), lambda params, e=e: self.point(e, params[0]))
            for e, (_, _, length) in enumerate(self.edges)
        ]


# ══════════════════════════════════════════════════════════════════════════════
#  Model files and the known diagram
# ══════════════════════════════════════════════════════════════════════════════

def model_from_dict(description: Dict) -> GeodesicSpaceModel:
    """Build a model from its JSON description."""
    if not isinstance(description, dict) or "kind" not in description:
        raise ModelFileError(f"model description needs a 'kind' field: {description!r}")
    kind = description["kind"]
    try:
        if kind == "circle":
            return Circle(description["circumference"])
        if kind == "wedge":
            return WedgeOfCircles(description["lengths"])
        if kind == "torus":
            return FlatTorus(description["w"], description["h"])
        if kind == "graph":
            return MetricGraph(description["vertices"], description["edges"], description.get("basepoint", (0, 0.0)))
    except KeyError as err:
        raise ModelFileError(f"{kind} model is missing field {err}")
    except ValidationError as err:
        raise ModelFileError(str(err))
    raise ModelFileError(f"unknown model kind {kind!r}")


def load_model(path) -> GeodesicSpaceModel:
    """Read a model description file."""
    path = Path(path)
    try:
        description = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise ModelFileError(f"cannot read model file {path}: {err}")
    model = model_from_dict(description)
    logger.debug("loaded %s model %s from %s", model.kind, model.model_id, path)
    return model


def known_diagram(model: GeodesicSpaceModel, field=None):
    """
    The H1 diagram of the space itself: one bar (0, l/3] per catalogue circle.

    Raises NoAnalyticCatalogue for metric graphs.
    """
    from homology import DecoratedDiagram, FieldP, PersistenceInterval

    field = field if field is not None else FieldP()
    intervals = tuple(
        PersistenceInterval(birth=0.0, death=circle.length / 3)
        for circle in sorted(model.critical_circles(), key=lambda circle: circle.length)
    )
    rmax = max((bar.death for bar in intervals), default=0.0)
    return DecoratedDiagram(intervals=intervals, rmax=rmax, field=field)

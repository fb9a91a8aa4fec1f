#!/usr/bin/env python3
"""
Open Vietoris–Rips filtrations, 2-skeleton only.

A simplex belongs to Rips(S, r) iff its diameter is strictly below r. The
skeleton stores every edge and triangle with diameter below the build horizon
rmax, sorted by (diameter, vertex indices); that order drives the reduction
in `homology`.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from errors import ArgumentError, HorizonError
from sampling import DistanceMatrix

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Triangle = Tuple[int, int, int]


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Complex2:
    """The simplices of a filtration present at a fixed parameter r."""

    vertices: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    triangles: Tuple[Triangle, ...]
    r: float

    def size(self) -> int:
        return len(self.vertices) + len(self.edges) + len(self.triangles)

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    def component(self, vertex: int) -> "Complex2":
        """The sub-complex spanned by the connected component of `vertex`."""
        keep = nx.node_connected_component(self.graph(), vertex)
        return Complex2(
            vertices=tuple(v for v in self.vertices if v in keep),
            edges=tuple(e for e in self.edges if e[0] in keep),
            triangles=tuple(t for t in self.triangles if t[0] in keep),
            r=self.r,
        )


@dataclass
class Filtration2Skeleton:
    """
    Edges and triangles of diameter below rmax, ascending by
    (diameter, vertex indices).
    """

    n: int
    edges: List[Edge]
    edge_diams: np.ndarray
    triangles: List[Triangle]
    triangle_diams: np.ndarray
    rmax: float
    edge_index: Dict[Edge, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.edge_index:
            self.edge_index = {e: k for k, e in enumerate(self.edges)}

    def edge_count_below(self, r: float) -> int:
        return int(np.searchsorted(self.edge_diams, r, side="left"))

    def triangle_count_below(self, r: float) -> int:
        return int(np.searchsorted(self.triangle_diams, r, side="left"))

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "rmax": self.rmax,
            "edges": [[i, j, float(d)] for (i, j), d in zip(self.edges, self.edge_diams)],
            "triangles": [[i, j, k, float(d)] for (i, j, k), d in zip(self.triangles, self.triangle_diams)],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Filtration2Skeleton":
        edges = [(int(i), int(j)) for i, j, _ in data["edges"]]
        triangles = [(int(i), int(j), int(k)) for i, j, k, _ in data["triangles"]]
        return cls(
            n=int(data["n"]),
            edges=edges,
            edge_diams=np.array([float(e[2]) for e in data["edges"]]),
            triangles=triangles,
            triangle_diams=np.array([float(t[3]) for t in data["triangles"]]),
            rmax=float(data["rmax"]),
        )


# ── Construction ──────────────────────────────────────────────────────────────

def build_filtration(dmatrix, rmax: float) -> Filtration2Skeleton:
    """
    Enumerate all edges and triangles of diameter below rmax.

    Args:
        dmatrix: DistanceMatrix or square array (validated either way).
        rmax: Build horizon, positive.

    Returns:
        Filtration2Skeleton sorted by (diameter, lexicographic vertices).
    """
    if not isinstance(dmatrix, DistanceMatrix):
        dmatrix = DistanceMatrix(np.asarray(dmatrix, dtype=float))
    if not rmax > 0:
        raise ArgumentError(f"rmax must be positive, got {rmax}")
    d = dmatrix.entries
    n = dmatrix.n

    iu, ju = np.triu_indices(n, k=1)
    keep = d[iu, ju] < rmax
    iu, ju = iu[keep], ju[keep]
    ed = d[iu, ju]
    order = np.lexsort((ju, iu, ed))
    edges = [(int(iu[k]), int(ju[k])) for k in order]
    edge_diams = ed[order]

    # Triangles: for each i, pairs (j, k) of later neighbours that are adjacent.
    adjacent = d < rmax
    np.fill_diagonal(adjacent, False)
    ti: List[np.ndarray] = []
    tj: List[np.ndarray] = []
    tk: List[np.ndarray] = []
    for i in range(n):
        later = np.nonzero(adjacent[i, i + 1:])[0] + i + 1
        if later.size < 2:
            continue
        sub = np.triu(adjacent[np.ix_(later, later)], k=1)
        a, b = np.nonzero(sub)
        ti.append(np.full(a.size, i))
        tj.append(later[a])
        tk.append(later[b])
    if ti:
        ti_a, tj_a, tk_a = np.concatenate(ti), np.concatenate(tj), np.concatenate(tk)
        td = np.maximum(np.maximum(d[ti_a, tj_a], d[ti_a, tk_a]), d[tj_a, tk_a])
        order = np.lexsort((tk_a, tj_a, ti_a, td))
        triangles = [(int(ti_a[k]), int(tj_a[k]), int(tk_a[k])) for k in order]
        triangle_diams = td[order]
    else:
        triangles, triangle_diams = [], np.zeros(0)

    logger.debug("skeleton: n=%d rmax=%g edges=%d triangles=%d", n, rmax, len(edges), len(triangles))
    return Filtration2Skeleton(
        n=n,
        edges=edges,
        edge_diams=np.asarray(edge_diams, dtype=float),
        triangles=triangles,
        triangle_diams=np.asarray(triangle_diams, dtype=float),
        rmax=float(rmax),
    )


def complex_at(filtration: Filtration2Skeleton, r: float) -> Complex2:
    """Simplices with diameter strictly below r."""
    if r > filtration.rmax:
        raise HorizonError(f"r={r} exceeds the build horizon rmax={filtration.rmax}; rebuild the filtration")
    ne = filtration.edge_count_below(r)
    nt = filtration.triangle_count_below(r)
    return Complex2(
        vertices=tuple(range(filtration.n)),
        edges=tuple(filtration.edges[:ne]),
        triangles=tuple(filtration.triangles[:nt]),
        r=float(r),
    )


def critical_radii(filtration: Filtration2Skeleton) -> List[float]:
    """Distinct edge and triangle diameters, ascending."""
    values = np.concatenate([filtration.edge_diams, filtration.triangle_diams])
    return [float(v) for v in np.unique(values)]


def refined_grid(radii: List[float], upper: Optional[float] = None) -> List[float]:
    """Critical radii plus the midpoints between consecutive ones (and one step past the last)."""
    grid = []
    for a, b in zip(radii, radii[1:]):
        grid += [a, (a + b) / 2]
    if radii:
        grid.append(radii[-1])
        step = radii[-1] - radii[-2] if len(radii) > 1 else radii[-1]
        grid.append(radii[-1] + step / 2)
    if upper is not None:
        grid = [g for g in grid if g <= upper]
    return grid


def save_skeleton(filtration: Filtration2Skeleton, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(filtration.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    return path

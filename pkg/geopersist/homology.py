#!/usr/bin/env python3
"""
H1 persistence of open Rips filtrations over a prime field F_p.

Edges are split by union-find: an edge joining two components is negative
(it kills an H0 class and enters the spanning forest), any other edge is
positive and creates an H1 class. The representative of a positive edge
e = (u, v) is its fundamental cycle: e followed by the forest path from v back
to u. Its pivot (largest edge in filtration order) is e itself, since the
forest path existed before e.

Triangle boundaries are then reduced column by column. A column that ends
with pivot e kills the class of e, giving the interval (diam e, diam t].
Intervals are open on the left and closed on the right: the class is alive
at r iff birth < r <= death. Unpaired classes are censored at rmax.

The same reduction expresses any cycle of Rips(S, r) in the basis of
classes alive at r, which gives induced maps, kernels and surjectivity.
"""

# ── Imports ───────────────────────────────────────────────────────────────────

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.bipartite import hopcroft_karp_matching

from errors import ArgumentError, CensoredMismatch, ComplexTooLarge, HorizonError, ModelFileError, ValidationError
from linalg_fp import inv_mod_scalar, is_prime, matmul_mod, nullspace_mod, rank_mod
from rips import Complex2, Filtration2Skeleton

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 2500
MATCH_TOLERANCE = 1e-12

Chain = Dict[int, int]


# ══════════════════════════════════════════════════════════════════════════════
#  Types
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class FieldP:
    """The prime field F_p."""

    p: int = 2

    def __post_init__(self):
        if not is_prime(int(self.p)):
            raise ValidationError(f"field characteristic must be prime, got {self.p}")


@dataclass(frozen=True)
class PersistenceInterval:
    """A bar (birth, death]; censored bars carry death = rmax."""

    birth: float
    death: float
    censored: bool = False
    representative: Tuple[Tuple[int, int, int], ...] = ()
    cycle: Tuple[int, ...] = ()
    birth_edge: Optional[Tuple[int, int]] = None
    death_triangle: Optional[Tuple[int, int, int]] = None

    left_open = True

    @property
    def right_closed(self) -> bool:
        return not self.censored

    @property
    def lifespan(self) -> float:
        return self.death - self.birth

    def contains(self, r: float) -> bool:
        return self.birth < r <= self.death

    def to_dict(self) -> Dict:
        return {
            "birth": self.birth,
            "death": self.death,
            "left_open": self.left_open,
            "right_closed": self.right_closed,
            "censored": self.censored,
            "representative": [list(term) for term in self.representative],
            "cycle": list(self.cycle),
            "birth_edge": list(self.birth_edge) if self.birth_edge else None,
            "death_triangle": list(self.death_triangle) if self.death_triangle else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "PersistenceInterval":
        return cls(
            birth=float(data["birth"]),
            death=float(data["death"]),
            censored=bool(data.get("censored", False)),
            representative=tuple(tuple(int(x) for x in term) for term in data.get("representative", ())),
            cycle=tuple(int(v) for v in data.get("cycle", ())),
            birth_edge=tuple(data["birth_edge"]) if data.get("birth_edge") else None,
            death_triangle=tuple(data["death_triangle"]) if data.get("death_triangle") else None,
        )


@dataclass(frozen=True)
class DecoratedDiagram:
    """A multiset of H1 intervals computed up to rmax."""

    intervals: Tuple[PersistenceInterval, ...]
    rmax: float
    field: FieldP = FieldP()

    def __len__(self) -> int:
        return len(self.intervals)

    def finite(self) -> List[PersistenceInterval]:
        return [bar for bar in self.intervals if not bar.censored]

    def censored(self) -> List[PersistenceInterval]:
        return [bar for bar in self.intervals if bar.censored]

    def deaths(self) -> List[float]:
        return sorted(bar.death for bar in self.intervals)

    def count_containing(self, r: float) -> int:
        return sum(1 for bar in self.intervals if bar.contains(r))

    def to_dict(self) -> Dict:
        return {
            "field": self.field.p,
            "rmax": self.rmax,
            "intervals": [bar.to_dict() for bar in self.intervals],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "DecoratedDiagram":
        if isinstance(data, list):
            data = {"intervals": data, "rmax": max((bar["death"] for bar in data), default=0.0)}
        return cls(
            intervals=tuple(PersistenceInterval.from_dict(bar) for bar in data["intervals"]),
            rmax=float(data["rmax"]),
            field=FieldP(int(data.get("field", 2))),
        )


@dataclass(frozen=True)
class InducedMap:
    """Matrix of H1(Rips(S, p)) → H1(Rips(S, q)) in the alive-class bases."""

    p: float
    q: float
    matrix: np.ndarray = field(compare=False)
    domain_basis: Tuple[int, ...]
    codomain_basis: Tuple[int, ...]
    field: FieldP = FieldP()

    def compose(self, earlier: "InducedMap") -> "InducedMap":
        """self ∘ earlier, for earlier: o → p and self: p → q."""
        if earlier.q != self.p:
            raise ArgumentError(f"cannot compose maps ending at {earlier.q} and starting at {self.p}")
        return InducedMap(
            p=earlier.p,
            q=self.q,
            matrix=matmul_mod(self.matrix, earlier.matrix, self.field.p),
            domain_basis=earlier.domain_basis,
            codomain_basis=self.codomain_basis,
            field=self.field,
        )


# ══════════════════════════════════════════════════════════════════════════════
#  H1Reduction — pairing, representatives and class coordinates
# ══════════════════════════════════════════════════════════════════════════════

class H1Reduction:
    """
    Reduced triangle columns and fundamental cycles of one filtration.

    Columns and cycles are sparse chains {edge index: coefficient in [0, p)},
    edges oriented from the smaller vertex to the larger.
    """

    def __init__(self, filtration: Filtration2Skeleton, field: FieldP = FieldP()):
        self.filtration = filtration
        self.field = field
        self.forest = nx.Graph()
        self.forest.add_nodes_from(range(filtration.n))
        self.positive: List[int] = []
        self.columns: Dict[int, Chain] = {}
        self.killer: Dict[int, int] = {}
        self._cycles: Dict[int, Chain] = {}
        self._split_edges()
        self._reduce()
        self.diagram = self._build_diagram()

    # ── Reduction ─────────────────────────────────────────────────────────────

    def _split_edges(self):
        parent = list(range(self.filtration.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for index, (u, v) in enumerate(self.filtration.edges):
            ru, rv = find(u), find(v)
            if ru == rv:
                self.positive.append(index)
            else:
                parent[ru] = rv
                self.forest.add_edge(u, v)

    def _boundary(self, triangle: Tuple[int, int, int]) -> Chain:
        i, j, k = triangle
        index = self.filtration.edge_index
        p = self.field.p
        return {index[(j, k)]: 1, index[(i, k)]: p - 1 if p > 2 else 1, index[(i, j)]: 1}

    def _reduce(self):
        p = self.field.p
        unpaired = list(self.positive)
        for t, triangle in enumerate(self.filtration.triangles):
            column = self._boundary(triangle)
            # Nothing left to kill below this pivot: the column reduces to zero.
            if not unpaired or unpaired[0] > max(column):
                continue
            if p == 2:
                chain = set(column)
                while chain:
                    low = max(chain)
                    if low not in self.columns:
                        break
                    chain.symmetric_difference_update(self.columns[low])
                reduced = {e: 1 for e in chain}
            else:
                reduced = column
                while reduced:
                    low = max(reduced)
                    if low not in self.columns:
                        break
                    pivot = self.columns[low]
                    factor = reduced[low] * inv_mod_scalar(pivot[low], p) % p
                    reduced = _axpy(reduced, pivot, -factor, p)
            if not reduced:
                continue
            low = max(reduced)
            self.columns[low] = reduced
            self.killer[low] = t
            del unpaired[unpaired.index(low)]
        logger.debug(
            "reduction: %d positive edges, %d paired, %d triangles",
            len(self.positive), len(self.killer), len(self.filtration.triangles),
        )

    # ── Cycles ────────────────────────────────────────────────────────────────

    def vertex_cycle(self, edge: int) -> List[int]:
        """Vertices of the fundamental cycle of a positive edge: u, v, then back to u."""
        u, v = self.filtration.edges[edge]
        path = nx.shortest_path(self.forest, v, u)
        return [u] + path[:-1]

    def cycle(self, edge: int) -> Chain:
        if edge not in self._cycles:
            self._cycles[edge] = chain_from_walk(self, self.vertex_cycle(edge))
        return self._cycles[edge]

    # ── Queries ───────────────────────────────────────────────────────────────

    def death_of(self, edge: int) -> Optional[float]:
        t = self.killer.get(edge)
        return None if t is None else float(self.filtration.triangle_diams[t])

    def alive_at(self, r: float) -> List[int]:
        """Positive edges whose class is alive at r, in filtration order."""
        diams = self.filtration.edge_diams
        alive = []
        for e in self.positive:
            if diams[e] >= r:
                break
            death = self.death_of(e)
            if death is None or death >= r:
                alive.append(e)
        return alive

    def _build_diagram(self) -> DecoratedDiagram:
        f = self.filtration
        p = self.field.p
        bars = []
        for e in self.positive:
            birth = float(f.edge_diams[e])
            death = self.death_of(e)
            if death is not None and death <= birth:
                continue
            chain = self.cycle(e)
            representative = tuple(
                (f.edges[k][0], f.edges[k][1], c % p) for k, c in sorted(chain.items())
            )
            bars.append(PersistenceInterval(
                birth=birth,
                death=f.rmax if death is None else death,
                censored=death is None,
                representative=representative,
                cycle=tuple(self.vertex_cycle(e)),
                birth_edge=f.edges[e],
                death_triangle=None if death is None else f.triangles[self.killer[e]],
            ))
        censored = sum(1 for bar in bars if bar.censored)
        if censored:
            logger.warning("%d H1 classes still alive at rmax=%g (censored)", censored, f.rmax)
        bars.sort(key=lambda bar: (bar.birth, bar.death))
        return DecoratedDiagram(intervals=tuple(bars), rmax=f.rmax, field=self.field)


def _axpy(x: Chain, y: Chain, a: int, p: int) -> Chain:
    """x + a*y over F_p, dropping zeros."""
    out = dict(x)
    for k, v in y.items():
        c = (out.get(k, 0) + a * v) % p
        if c:
            out[k] = c
        else:
            out.pop(k, None)
    return out


def chain_from_walk(reduction: H1Reduction, vertices: Sequence[int]) -> Chain:
    """Edge chain of the closed walk v0 → v1 → … → v0; repeated vertices are skipped."""
    index = reduction.filtration.edge_index
    p = reduction.field.p
    chain: Chain = {}
    walk = list(vertices)
    for a, b in zip(walk, walk[1:] + walk[:1]):
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in index:
            raise HorizonError(f"edge {key} is not in the filtration")
        chain = _axpy(chain, {index[key]: 1}, 1 if a < b else p - 1, p)
    return chain


def reduce_h1(filtration: Filtration2Skeleton, field: FieldP = FieldP()) -> H1Reduction:
    return H1Reduction(filtration, field)


def _as_reduction(source, field: Optional[FieldP]) -> H1Reduction:
    if isinstance(source, H1Reduction):
        return source
    return H1Reduction(source, field or FieldP())


# ══════════════════════════════════════════════════════════════════════════════
#  Operations
# ══════════════════════════════════════════════════════════════════════════════

def persist_h1(filtration: Filtration2Skeleton, field: FieldP = FieldP()) -> DecoratedDiagram:
    """Decorated H1 diagram of the filtration."""
    return H1Reduction(filtration, field).diagram


def rank_at(reduction: H1Reduction, r: float) -> int:
    """Number of classes alive at r."""
    return len(reduction.alive_at(r))


def coordinates_at(reduction: H1Reduction, chain: Chain, r: float) -> np.ndarray:
    """
    Coordinates of a cycle of Rips(S, r) in the basis of classes alive at r.

    Raises ArgumentError if the chain is not a cycle of Rips(S, r).
    """
    p = reduction.field.p
    f = reduction.filtration
    alive = reduction.alive_at(r)
    position = {e: k for k, e in enumerate(alive)}
    coords = np.zeros(len(alive), dtype=np.int64)
    rest = {k: c % p for k, c in chain.items() if c % p}
    while rest:
        low = max(rest)
        if f.edge_diams[low] >= r:
            raise ArgumentError(f"chain uses edge {f.edges[low]} which is not present at r={r}")
        t = reduction.killer.get(low)
        if t is not None and f.triangle_diams[t] < r:
            column = reduction.columns[low]
        elif low in position:
            column = reduction.cycle(low)
            coords[position[low]] = (coords[position[low]] + rest[low] * inv_mod_scalar(column[low], p)) % p
        else:
            raise ArgumentError("chain is not a cycle")
        factor = rest[low] * inv_mod_scalar(column[low], p) % p
        rest = _axpy(rest, column, -factor, p)
    return coords


def induced_map_h1(source, p: float, q: float, field: Optional[FieldP] = None) -> InducedMap:
    """
    Matrix of the map induced by Rips(S, p) ⊆ Rips(S, q).

    Args:
        source: Filtration2Skeleton or an existing H1Reduction.
        p, q: Parameters with 0 < p < q <= rmax.
    """
    reduction = _as_reduction(source, field)
    if not 0 < p < q:
        raise ArgumentError(f"induced maps need 0 < p < q, got p={p}, q={q}")
    if q > reduction.filtration.rmax:
        raise HorizonError(f"q={q} exceeds rmax={reduction.filtration.rmax}")
    domain = reduction.alive_at(p)
    codomain = reduction.alive_at(q)
    matrix = np.zeros((len(codomain), len(domain)), dtype=np.int64)
    for k, e in enumerate(domain):
        matrix[:, k] = coordinates_at(reduction, reduction.cycle(e), q)
    return InducedMap(p, q, matrix, tuple(domain), tuple(codomain), reduction.field)


def kernel_subspace(source, p: float, q: float, field: Optional[FieldP] = None) -> np.ndarray:
    """Basis (columns) of ker i_{p,q} in H1(p) coordinates."""
    mapping = induced_map_h1(source, p, q, field)
    return nullspace_mod(mapping.matrix, mapping.field.p)


def is_surjective(mapping: InducedMap) -> Tuple[bool, int]:
    rank = rank_mod(mapping.matrix, mapping.field.p)
    return rank == mapping.matrix.shape[0], rank


def brute_force_h1_rank(complex2: Complex2, field: FieldP = FieldP()) -> int:
    """dim ker ∂1 − rank ∂2 from dense boundary matrices."""
    if complex2.size() > BRUTE_FORCE_LIMIT:
        raise ComplexTooLarge(f"complex has {complex2.size()} simplices, limit is {BRUTE_FORCE_LIMIT}")
    p = field.p
    vertex_pos = {v: k for k, v in enumerate(complex2.vertices)}
    edge_pos = {e: k for k, e in enumerate(complex2.edges)}
    d1 = np.zeros((len(complex2.vertices), len(complex2.edges)), dtype=np.int64)
    for k, (i, j) in enumerate(complex2.edges):
        d1[vertex_pos[i], k] = p - 1
        d1[vertex_pos[j], k] = 1
    d2 = np.zeros((len(complex2.edges), len(complex2.triangles)), dtype=np.int64)
    for k, (i, j, l) in enumerate(complex2.triangles):
        d2[edge_pos[(j, l)], k] = 1
        d2[edge_pos[(i, l)], k] = p - 1
        d2[edge_pos[(i, j)], k] = 1
    return len(complex2.edges) - rank_mod(d1, p) - rank_mod(d2, p)


# ── Bottleneck distance ───────────────────────────────────────────────────────

def _linf(a: PersistenceInterval, b: PersistenceInterval) -> float:
    return max(abs(a.birth - b.birth), abs(a.death - b.death))


def _feasible(xs, ys, M) -> Optional[List[Tuple[Optional[int], Optional[int]]]]:
    """Perfect matching with all costs <= M, or None. Diagonal copies pad both sides."""
    g = nx.Graph()
    left = [("a", i) for i in range(len(xs))] + [("da", j) for j in range(len(ys))]
    right = [("b", j) for j in range(len(ys))] + [("db", i) for i in range(len(xs))]
    g.add_nodes_from(left, bipartite=0)
    g.add_nodes_from(right, bipartite=1)
    for i, a in enumerate(xs):
        if a.lifespan / 2 <= M + MATCH_TOLERANCE:
            g.add_edge(("a", i), ("db", i))
        for j, b in enumerate(ys):
            if _linf(a, b) <= M + MATCH_TOLERANCE:
                g.add_edge(("a", i), ("b", j))
    for j, b in enumerate(ys):
        if b.lifespan / 2 <= M + MATCH_TOLERANCE:
            g.add_edge(("da", j), ("b", j))
        for i in range(len(xs)):
            g.add_edge(("da", j), ("db", i))
    matching = hopcroft_karp_matching(g, top_nodes=left)
    if sum(1 for node in left if node in matching) < len(left):
        return None
    pairs = []
    for i in range(len(xs)):
        kind, j = matching[("a", i)]
        pairs.append((i, j if kind == "b" else None))
    for j in range(len(ys)):
        kind, _ = matching[("b", j)]
        if kind == "da":
            pairs.append((None, j))
    return pairs


def bottleneck(diag_a: DecoratedDiagram, diag_b: DecoratedDiagram) -> Tuple[float, List[Tuple[Optional[int], Optional[int]]]]:
    """
    Bottleneck distance with the L-infinity ground metric.

    Returns (distance, matching) where matching pairs indices into
    diag_a.intervals and diag_b.intervals (None = diagonal).
    """
    cens_a = [k for k, bar in enumerate(diag_a.intervals) if bar.censored]
    cens_b = [k for k, bar in enumerate(diag_b.intervals) if bar.censored]
    if len(cens_a) != len(cens_b):
        raise CensoredMismatch(
            f"{len(cens_a)} censored bars against {len(cens_b)}; rebuild with a larger rmax"
        )
    cens_a.sort(key=lambda k: diag_a.intervals[k].birth)
    cens_b.sort(key=lambda k: diag_b.intervals[k].birth)
    censored_cost = max(
        (abs(diag_a.intervals[i].birth - diag_b.intervals[j].birth) for i, j in zip(cens_a, cens_b)),
        default=0.0,
    )

    fin_a = [k for k, bar in enumerate(diag_a.intervals) if not bar.censored]
    fin_b = [k for k, bar in enumerate(diag_b.intervals) if not bar.censored]
    xs = [diag_a.intervals[k] for k in fin_a]
    ys = [diag_b.intervals[k] for k in fin_b]
    candidates = sorted(
        {0.0}
        | {a.lifespan / 2 for a in xs}
        | {b.lifespan / 2 for b in ys}
        | {_linf(a, b) for a in xs for b in ys}
    )
    lo, hi = 0, len(candidates) - 1
    best = _feasible(xs, ys, candidates[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        found = _feasible(xs, ys, candidates[mid])
        if found is None:
            lo = mid + 1
        else:
            hi, best = mid, found
    finite_cost = candidates[lo]

    matching = [
        (None if i is None else fin_a[i], None if j is None else fin_b[j]) for i, j in best
    ]
    matching += list(zip(cens_a, cens_b))
    return max(finite_cost, censored_cost), matching


# ── Files ─────────────────────────────────────────────────────────────────────

def save_diagram(diagram: DecoratedDiagram, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(diagram.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def load_diagram(path) -> DecoratedDiagram:
    """Read a diagram file; a bare list of intervals is accepted too."""
    path = Path(path)
    try:
        return DecoratedDiagram.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as err:
        raise ModelFileError(f"cannot read diagram file {path}: {err}")

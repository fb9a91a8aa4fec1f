#!/usr/bin/env python3
"""
Edge-path presentations of π1 of a Rips 2-skeleton.

Generators are the edges outside a BFS spanning tree rooted at the basepoint,
relators are the boundary words of triangles. Words are tuples of nonzero
ints: +k is generator k-1, -k its inverse.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import networkx as nx
import numpy as np

from errors import ArgumentError
from homology import FieldP
from linalg_fp import rank_mod
from rips import Complex2

logger = logging.getLogger(__name__)

DEFAULT_PASS_BUDGET = 50

Word = Tuple[int, ...]


@dataclass(frozen=True)
class Presentation:
    generators: Tuple[str, ...]
    relators: Tuple[Word, ...]
    basepoint: int = 0

    def _letter(self, x: int) -> str:
        name = self.generators[abs(x) - 1]
        return name if x > 0 else f"{name}^-1"

    def to_text(self) -> str:
        gens = ", ".join(self.generators)
        rels = ", ".join(" ".join(self._letter(x) for x in word) for word in self.relators)
        return f"< {gens} | {rels} >"

    def to_dict(self) -> Dict:
        return {
            "basepoint": self.basepoint,
            "generators": list(self.generators),
            "relators": [list(word) for word in self.relators],
        }


# ── Words ─────────────────────────────────────────────────────────────────────

def free_reduce(word: Sequence[int]) -> Word:
    out: List[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word: Sequence[int]) -> Word:
    w = list(free_reduce(word))
    while len(w) > 1 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def invert(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


# ── Presentation of a complex ─────────────────────────────────────────────────

def edge_path_presentation(complex2: Complex2, basepoint: int = 0) -> Presentation:
    """
    Generators are non-tree edges of a BFS tree from the basepoint; one
    relator per triangle. Disconnected complexes are restricted to the
    basepoint's component.
    """
    if basepoint not in complex2.vertices:
        raise ArgumentError(f"basepoint {basepoint} is not a vertex of the complex")
    component = complex2.component(basepoint)
    if len(component.vertices) < len(complex2.vertices):
        logger.warning(
            "complex at r=%g is disconnected; presenting the component of vertex %d (%d of %d vertices)",
            complex2.r, basepoint, len(component.vertices), len(complex2.vertices),
        )
    graph = component.graph()
    tree = nx.bfs_tree(graph, basepoint)
    tree_edges = {(min(a, b), max(a, b)) for a, b in tree.edges()}

    letters: Dict[Tuple[int, int], int] = {}
    names: List[str] = []
    for i, j in component.edges:
        if (i, j) not in tree_edges:
            names.append(f"e{i}_{j}")
            letters[(i, j)] = len(names)

    def step(a: int, b: int) -> Word:
        key = (min(a, b), max(a, b))
        k = letters.get(key)
        if k is None:
            return ()
        return (k,) if a < b else (-k,)

    relators = []
    dropped = 0
    for i, j, k in component.triangles:
        word = cyclic_reduce(step(i, j) + step(j, k) + step(k, i))
        if word:
            relators.append(word)
        else:
            dropped += 1
    logger.debug("presentation: %d generators, %d relators (%d trivial dropped)", len(names), len(relators), dropped)
    return Presentation(tuple(names), tuple(relators), basepoint)


# ── Tietze moves ──────────────────────────────────────────────────────────────

def _substitute(word: Word, generator: int, replacement: Word) -> Word:
    out: List[int] = []
    for x in word:
        if abs(x) == generator:
            out.extend(replacement if x > 0 else invert(replacement))
        else:
            out.append(x)
    return cyclic_reduce(out)


def _drop_generator(pres_gens: List[str], relators: List[Word], generator: int) -> Tuple[List[str], List[Word]]:
    """Remove a generator that no longer occurs and renumber the rest."""
    gens = pres_gens[:generator - 1] + pres_gens[generator:]

    def shift(x: int) -> int:
        k = abs(x)
        k = k - 1 if k > generator else k
        return k if x > 0 else -k

    return gens, [tuple(shift(x) for x in word) for word in relators]


def _normalize(relators: Sequence[Word]) -> List[Word]:
    seen = set()
    out = []
    for word in relators:
        word = cyclic_reduce(word)
        if word and word not in seen and invert(word) not in seen:
            seen.add(word)
            out.append(word)
    return out


def tietze_simplify(pres: Presentation, pass_budget: int = DEFAULT_PASS_BUDGET) -> Presentation:
    """
    Remove length-1 relators with their generator, substitute length-2
    relators x y = 1 (x ≠ y^±1 generators) by x = y^-1, and reduce words;
    stops at a fixpoint or after `pass_budget` passes.
    """
    if pass_budget < 1:
        raise ArgumentError(f"pass budget must be at least 1, got {pass_budget}")
    gens = list(pres.generators)
    relators = _normalize(pres.relators)

    for passes in range(1, pass_budget + 1):
        changed = False
        k = 0
        while k < len(relators):
            word = relators[k]
            generator, replacement = None, None
            if len(word) == 1:
                generator, replacement = abs(word[0]), ()
            elif len(word) == 2 and abs(word[0]) != abs(word[1]):
                x, y = word
                # x y = 1  →  x = y^-1
                generator = abs(x)
                replacement = (-y,) if x > 0 else (y,)
            if generator is None:
                k += 1
                continue
            rest = relators[:k] + relators[k + 1:]
            rest = [_substitute(w, generator, replacement) for w in rest]
            gens, relators = _drop_generator(gens, _normalize(rest), generator)
            relators = _normalize(relators)
            changed = True
            k = 0
        if not changed:
            break
    logger.debug("tietze: %d -> %d generators after %d passes", len(pres.generators), len(gens), passes)
    return Presentation(tuple(gens), tuple(relators), pres.basepoint)


# ── Abelian invariants ────────────────────────────────────────────────────────

def abelianization_rank(pres: Presentation, field: FieldP = FieldP()) -> int:
    """(# generators) − rank over F_p of the relator exponent-sum matrix."""
    n = len(pres.generators)
    if n == 0:
        return 0
    matrix = np.zeros((len(pres.relators), n), dtype=np.int64)
    for row, word in enumerate(pres.relators):
        for x in word:
            matrix[row, abs(x) - 1] += 1 if x > 0 else -1
    return n - rank_mod(matrix, field.p)


def save_presentation(pres: Presentation, stem) -> Tuple[Path, Path]:
    """Write <stem>.txt (plain ⟨gens | relators⟩) and <stem>.json."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    text_path = stem.with_suffix(".txt")
    json_path = stem.with_suffix(".json")
    text_path.write_text(pres.to_text() + "\n", encoding="utf-8")
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(pres.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    return text_path, json_path

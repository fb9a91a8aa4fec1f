"""Tests for edge-path presentations, Tietze simplification and abelianization ranks."""
import json
from pathlib import Path
import sys

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
from errors import ArgumentError
from homology import FieldP, H1Reduction, brute_force_h1_rank, rank_at
from pi1 import (
    Presentation,
    abelianization_rank,
    cyclic_reduce,
    edge_path_presentation,
    free_reduce,
    invert,
    save_presentation,
    tietze_simplify,
)
from rips import build_filtration, complex_at
from sampling import DistanceMatrix, restrict_metric


def triangle_and_square():
    """A filled triangle (0-2) far from a hollow square (3-6)."""
    entries = np.full((7, 7), 10.0)
    entries[:3, :3] = 1.0
    entries[3:, 3:] = [
        [1.0, 1.0, 2.0, 1.0],
        [1.0, 1.0, 1.0, 2.0],
        [2.0, 1.0, 1.0, 1.0],
        [1.0, 2.0, 1.0, 1.0],
    ]
    np.fill_diagonal(entries, 0.0)
    return DistanceMatrix(entries)


class TestWords:
    """Free and cyclic reduction."""

    def test_free_reduce(self):
        assert free_reduce((1, -1, 2)) == (2,)
        assert free_reduce((1, 2, -2, -1)) == ()

    def test_cyclic_reduce(self):
        assert cyclic_reduce((1, 2, -1)) == (2,)
        assert cyclic_reduce((-3, 1, 2, 3)) == (1, 2)

    def test_invert(self):
        assert invert((1, -2)) == (2, -1)


class TestEdgePathPresentation:
    """Generators off a BFS tree, one relator per triangle."""

    def test_square_cycle(self, square_matrix):
        pres = edge_path_presentation(complex_at(build_filtration(square_matrix, 3.0), 1.5))
        assert pres.generators == ("e2_3",)
        assert pres.relators == ()
        assert abelianization_rank(pres) == 1

    def test_filled_square(self, square_matrix):
        c = complex_at(build_filtration(square_matrix, 3.0), 2.5)
        pres = edge_path_presentation(c)
        assert len(pres.generators) == 3
        assert abelianization_rank(pres) == 0
        assert tietze_simplify(pres).generators == ()

    def test_disconnected_complex_warns(self, square_matrix, caplog):
        c = complex_at(build_filtration(square_matrix, 3.0), 0.5)
        with caplog.at_level("WARNING"):
            pres = edge_path_presentation(c)
        assert pres.generators == ()
        assert "disconnected" in caplog.text

    def test_basepoint_outside_the_complex(self, square_matrix):
        with pytest.raises(ArgumentError):
            edge_path_presentation(complex_at(build_filtration(square_matrix, 3.0), 1.5), basepoint=7)

    def test_text_form(self):
        pres = Presentation(("a", "b"), ((1, -2),))
        assert pres.to_text() == "< a, b | a b^-1 >"


class TestTietze:
    """Simplification keeps the group."""

    def test_length_two_relator_eliminates_a_generator(self):
        simplified = tietze_simplify(Presentation(("a", "b"), ((1, 2),)))
        assert len(simplified.generators) == 1
        assert simplified.relators == ()

    def test_length_one_relator_kills_a_generator(self):
        simplified = tietze_simplify(Presentation(("a", "b", "c"), ((2,), (1, 2, 3, -2, 3))))
        assert simplified.generators == ("a", "c")
        assert simplified.relators == ((1, 2, 2),)

    def test_torsion_survives(self):
        pres = tietze_simplify(Presentation(("a",), ((1, 1),)))
        assert pres.relators == ((1, 1),)
        assert abelianization_rank(pres, FieldP(2)) == 1
        assert abelianization_rank(pres, FieldP(3)) == 0

    def test_pass_budget(self):
        with pytest.raises(ArgumentError):
            tietze_simplify(Presentation(("a",), ()), pass_budget=0)

    @pytest.mark.parametrize("p", [2, 3])
    def test_abelianization_is_preserved(self, circle, enriched_circle_sample, p):
        f = build_filtration(restrict_metric(circle, enriched_circle_sample), 0.4)
        pres = edge_path_presentation(complex_at(f, 0.2))
        fp = FieldP(p)
        assert abelianization_rank(tietze_simplify(pres), fp) == abelianization_rank(pres, fp) == 1


class TestHurewicz:
    """Abelianization rank equals H1 rank of the basepoint component."""

    @pytest.mark.parametrize("r", [0.1, 0.2, 0.3, 0.35, 0.4])
    @pytest.mark.parametrize("p", [2, 3])
    def test_enriched_circle(self, circle, enriched_circle_sample, r, p):
        fp = FieldP(p)
        f = build_filtration(restrict_metric(circle, enriched_circle_sample), 0.45)
        c = complex_at(f, r)
        assert abelianization_rank(edge_path_presentation(c), fp) == rank_at(H1Reduction(f, fp), r)

    def test_square(self, square_matrix):
        f = build_filtration(square_matrix, 3.0)
        for r in (1.5, 2.0, 2.5):
            c = complex_at(f, r)
            assert abelianization_rank(edge_path_presentation(c)) == brute_force_h1_rank(c)

    @pytest.mark.parametrize("basepoint,rank", [(0, 0), (2, 0), (3, 1), (5, 1)])
    def test_disconnected_complex_uses_the_basepoint_component(self, basepoint, rank):
        c = complex_at(build_filtration(triangle_and_square(), 3.0), 1.5)
        assert brute_force_h1_rank(c) == 1
        assert brute_force_h1_rank(c.component(basepoint)) == rank
        assert abelianization_rank(edge_path_presentation(c, basepoint)) == rank


class TestFiles:
    """Presentation output."""

    def test_text_and_json(self, temp_dir):
        pres = Presentation(("a", "b"), ((1, 2, -1, -2),))
        text_path, json_path = save_presentation(pres, temp_dir / "out" / "presentation")
        assert text_path.read_text() == "< a, b | a b a^-1 b^-1 >\n"
        assert json.loads(json_path.read_text())["relators"] == [[1, 2, -1, -2]]

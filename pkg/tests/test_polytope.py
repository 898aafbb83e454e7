"""Polytope combinatorics against independent brute-force oracles."""

from fractions import Fraction
from itertools import combinations, product

import pytest

from nctoric.polytope import (
    DelzantPolytope,
    contains,
    lattice_points,
    parse_polytope_dict,
    polytope_to_dict,
    standard,
    validate_delzant,
    vertices,
)

CATALOG = ["cp1", "cp2", "cp1xcp1"]


def catalog_polytopes():
    return [standard(n) for n in CATALOG] + [standard("hirzebruch", 1)]


def brute_force_vertices(P):
    """Oracle: solve every facet d-subset as a float system, keep feasible points."""
    import numpy as np

    d = P.dim
    found = set()
    for subset in combinations(range(P.nfacets), d):
        A = np.array([P.normals[i] for i in subset], dtype=float)
        b = np.array([-P.offsets[i] for i in subset], dtype=float)
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        x = np.linalg.solve(A, b)
        vals = [sum(v[j] * x[j] for j in range(d)) + a for v, a in zip(P.normals, P.offsets)]
        if min(vals) > -1e-9:
            found.add(tuple(round(c, 6) for c in x))
    return found


def brute_force_points(P, n):
    """Oracle: scan a crude box that provably covers the dilate."""
    c = 1 + max(
        max(abs(x) for v in P.normals for x in v), max(abs(a) for a in P.offsets)
    )
    lo, hi = -c * (n + 1), c * (n + 1)
    pts = set()
    for m in product(range(lo, hi + 1), repeat=P.dim):
        if all(
            sum(v[k] * m[k] for k in range(P.dim)) + n * a >= 0
            for v, a in zip(P.normals, P.offsets)
        ):
            pts.add(m)
    return pts


class TestStandardCatalog:
    def test_cp2_facets(self):
        P = standard("cp2")
        assert P.normals == ((1, 0), (0, 1), (-1, -1))
        assert P.offsets == (0, 0, 1)

    def test_cp1xcp1_is_unit_square(self):
        P = standard("cp1xcp1")
        assert P.nfacets == 4
        assert sorted(vertices(P)) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_hirzebruch_1_vertices_match_bruteforce(self):
        P = standard("hirzebruch", 1)
        got = {tuple(float(c) for c in v) for v in vertices(P)}
        assert got == {(0.0, 0.0), (2.0, 0.0), (0.0, 1.0), (1.0, 1.0)}
        assert got == {tuple(map(float, v)) for v in brute_force_vertices(P)}

    def test_simplex_3d(self):
        P = standard("simplex", 3)
        assert len(vertices(P)) == 4
        assert validate_delzant(P).passed

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            standard("nope")
        with pytest.raises(ValueError):
            standard("hirzebruch", 0)


class TestValidation:
    def test_catalog_all_pass(self):
        for P in catalog_polytopes():
            report = validate_delzant(P)
            assert report.passed, report.messages

    def test_cp2_vertex_cones_unimodular(self):
        report = validate_delzant(standard("cp2"))
        assert len(report.vertex_diagnostics) == 3
        assert all(abs(d.cone_det) == 1 for d in report.vertex_diagnostics)

    def test_weighted_projective_fails_at_singular_vertex(self):
        # P(1,1,2): x >= 0, y >= 0, x + 2y <= 2. The singular vertex is
        # (0, 1), where the normals (1,0), (-1,-2) have determinant -2.
        P = DelzantPolytope(2, ((1, 0), (0, 1), (-1, -2)), (0, 0, 2))
        report = validate_delzant(P)
        assert not report.passed
        bad = [d for d in report.vertex_diagnostics if not d.unimodular]
        assert len(bad) == 1
        assert tuple(map(int, bad[0].vertex)) == (0, 1)
        assert abs(bad[0].cone_det) == 2

    def test_unbounded_flagged_not_thrown(self):
        P = DelzantPolytope(2, ((1, 0), (0, 1)), (0, 0))
        report = validate_delzant(P)
        assert not report.passed
        assert not report.bounded

    def test_nonintegral_vertex_flagged(self):
        P = DelzantPolytope(2, ((1, 0), (0, 1), (-2, -2)), (0, 0, 1))
        report = validate_delzant(P)
        assert not report.passed
        assert any(not d.integral for d in report.vertex_diagnostics)

    def test_nonsimple_vertex_reported(self):
        # Four facets through the origin corner (square with a redundant
        # diagonal cut through a vertex).
        P = DelzantPolytope(
            2, ((1, 0), (0, 1), (1, 1), (-1, 0), (0, -1)), (0, 0, 0, 1, 1)
        )
        report = validate_delzant(P)
        assert not report.passed
        assert any(not d.simple for d in report.vertex_diagnostics)


class TestLatticePoints:
    def test_zero_dilate_is_origin(self):
        for P in catalog_polytopes():
            assert lattice_points(P, 0) == [(0,) * P.dim]

    def test_cp2_degree_2(self):
        got = lattice_points(standard("cp2"), 2)
        assert set(got) == {(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2)}
        assert len(got) == 6

    def test_square_counts(self):
        P = standard("cp1xcp1")
        assert len(lattice_points(P, 3)) == 16

    def test_sorted_lexicographically(self):
        pts = lattice_points(standard("cp2"), 3)
        assert pts == sorted(pts)

    @pytest.mark.parametrize("n", range(7))
    def test_bruteforce_oracle_equivalence(self, n):
        for P in catalog_polytopes():
            assert set(lattice_points(P, n)) == brute_force_points(P, n)

    def test_minkowski_closure(self):
        for P in catalog_polytopes():
            for n1 in range(3):
                for n2 in range(3):
                    big = set(lattice_points(P, n1 + n2))
                    for a in lattice_points(P, n1):
                        for b in lattice_points(P, n2):
                            s = tuple(x + y for x, y in zip(a, b))
                            assert s in big

    def test_members_satisfy_contains(self):
        for P in catalog_polytopes():
            for n in range(4):
                for m in lattice_points(P, n):
                    assert contains(P, n, m, 0.0)


class TestContains:
    def test_interior_point(self):
        assert contains(standard("cp2"), 1, (0.3, 0.4), 0.0)

    def test_exterior_point(self):
        assert not contains(standard("cp2"), 1, (0.7, 0.7), 0.0)

    def test_boundary_with_slack(self):
        assert contains(standard("cp2"), 2, (1.0, 1.0), 1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            contains(standard("cp2"), 1, (0.1,), 0.0)


class TestVertices:
    def test_cp2(self):
        assert sorted(vertices(standard("cp2"))) == [(0, 0), (0, 1), (1, 0)]

    def test_each_vertex_saturates_exactly_d_facets(self):
        for P in catalog_polytopes():
            for v in vertices(P):
                active = sum(1 for val in P.facet_values(v) if val == 0)
                assert active == P.dim

    def test_exact_rational_output(self):
        P = DelzantPolytope(2, ((1, 0), (0, 1), (-2, -2)), (0, 0, 1))
        vs = vertices(P)
        assert (Fraction(1, 2), Fraction(0)) in vs


class TestWireFormat:
    def test_roundtrip(self):
        P = standard("hirzebruch", 2)
        assert parse_polytope_dict(polytope_to_dict(P)) == P

    def test_offsets_length_mismatch_diagnostic(self):
        data = {"dim": 2, "normals": [[1, 0], [0, 1]], "offsets": [0]}
        with pytest.raises(ValueError, match="offsets"):
            parse_polytope_dict(data)

    def test_row_length_mismatch_diagnostic(self):
        data = {"dim": 2, "normals": [[1, 0], [1]], "offsets": [0, 0]}
        with pytest.raises(ValueError, match="row 1"):
            parse_polytope_dict(data)

    def test_non_integer_entries_rejected(self):
        data = {"dim": 2, "normals": [[1, 0], [0.5, 1]], "offsets": [0, 0]}
        with pytest.raises(ValueError, match="integers"):
            parse_polytope_dict(data)

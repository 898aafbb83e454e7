"""Exact combinatorics of Delzant polytopes.

A polytope is stored by its half-space description

    Delta = { x in R^d : <v_i, x> + a_i >= 0  for all facets i },

with integer normals v_i and integer offsets a_i, so that the n-th dilate
is obtained by scaling the offsets.  Everything here is exact: vertices
are solved over the rationals, lattice points are enumerated with integer
arithmetic, and Delzant smoothness is an integer determinant condition.

Non-integral or non-simple inputs are accepted at construction and
rejected by :func:`validate_delzant` with per-vertex diagnostics, so the
validator itself is testable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "DelzantPolytope",
    "LatticePoint",
    "VertexDiagnostic",
    "DelzantReport",
    "standard",
    "validate_delzant",
    "lattice_points",
    "contains",
    "vertices",
    "load_polytope",
    "parse_polytope_dict",
    "polytope_to_dict",
]

LatticePoint = tuple[int, ...]


@dataclass(frozen=True)
class DelzantPolytope:
    """Half-space description {x : <v_i, x> + a_i >= 0} with integer data."""

    dim: int
    normals: tuple[tuple[int, ...], ...]
    offsets: tuple[int, ...]
    name: str | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be a positive integer")
        if len(self.normals) == 0:
            raise ValueError("facet list must be nonempty")
        if len(self.normals) != len(self.offsets):
            raise ValueError("normals and offsets must have equal length")
        for v in self.normals:
            if len(v) != self.dim:
                raise ValueError(f"normal {v} does not have dimension {self.dim}")

    @property
    def nfacets(self) -> int:
        return len(self.normals)

    def facet_values(self, x: Sequence, n: int | float | Fraction = 1):
        """The slacks <v_i, x> + n*a_i, exact when x is exact."""
        return [
            sum(vi * xi for vi, xi in zip(v, x)) + n * a
            for v, a in zip(self.normals, self.offsets)
        ]


def standard(name: str, param: int | None = None) -> DelzantPolytope:
    """Catalog of standard integral Delzant polytopes.

    ``simplex`` takes the dimension, ``hirzebruch`` the twist a >= 1; the
    other names are fixed two- or one-dimensional examples.
    """
    key = name.lower()
    if key == "cp1":
        return DelzantPolytope(1, ((1,), (-1,)), (0, 1), name="cp1")
    if key == "cp2":
        return DelzantPolytope(2, ((1, 0), (0, 1), (-1, -1)), (0, 0, 1), name="cp2")
    if key == "cp1xcp1":
        return DelzantPolytope(
            2, ((1, 0), (0, 1), (-1, 0), (0, -1)), (0, 0, 1, 1), name="cp1xcp1"
        )
    if key == "simplex":
        if param is None or param < 1:
            raise ValueError("simplex requires a positive dimension parameter")
        d = param
        normals = tuple(
            tuple(1 if j == i else 0 for j in range(d)) for i in range(d)
        ) + ((-1,) * d,)
        return DelzantPolytope(d, normals, (0,) * d + (1,), name=f"simplex{d}")
    if key == "hirzebruch":
        if param is None or param < 1:
            raise ValueError("hirzebruch requires an integer parameter a >= 1")
        a = param
        return DelzantPolytope(
            2,
            ((1, 0), (0, 1), (0, -1), (-1, -a)),
            (0, 0, 1, a + 1),
            name=f"hirzebruch{a}",
        )
    raise ValueError(f"unknown polytope name {name!r}")


def _solve_square(rows: Sequence[Sequence[int]], rhs: Sequence[Fraction]) -> tuple[Fraction, ...] | None:
    """Solve an exact d x d linear system by Gaussian elimination; None if singular."""
    d = len(rows)
    aug = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    for col in range(d):
        pivot = next((r for r in range(col, d) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = aug[col][col]
        aug[col] = [x / inv for x in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return tuple(aug[r][d] for r in range(d))


def _det(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant (fraction-free enough at desk scale)."""
    d = len(rows)
    mat = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    for col in range(d):
        pivot = next((r for r in range(col, d) if mat[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            det = -det
        det *= mat[col][col]
        inv = mat[col][col]
        for r in range(col + 1, d):
            if mat[r][col] != 0:
                factor = mat[r][col] / inv
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[col])]
    assert det.denominator == 1
    return int(det)


def _rank(rows: Sequence[Sequence[int]]) -> int:
    mat = [[Fraction(x) for x in row] for row in rows]
    ncols = len(mat[0]) if mat else 0
    rank, row = 0, 0
    for col in range(ncols):
        pivot = next((r for r in range(row, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[row], mat[pivot] = mat[pivot], mat[row]
        inv = mat[row][col]
        mat[row] = [x / inv for x in mat[row]]
        for r in range(len(mat)):
            if r != row and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[row])]
        rank += 1
        row += 1
    return rank


def _nullspace_vector(rows: Sequence[Sequence[int]], dim: int) -> tuple[Fraction, ...] | None:
    """Any nonzero exact kernel vector of the row matrix, or None if full rank."""
    mat = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    row_idx = 0
    for col in range(dim):
        pivot = next((r for r in range(row_idx, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[row_idx], mat[pivot] = mat[pivot], mat[row_idx]
        inv = mat[row_idx][col]
        mat[row_idx] = [x / inv for x in mat[row_idx]]
        for r in range(len(mat)):
            if r != row_idx and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[row_idx])]
        pivots.append(col)
        row_idx += 1
    free = [c for c in range(dim) if c not in pivots]
    if not free:
        return None
    # Kernel vector with the first free variable set to 1.
    col = free[0]
    vec = [Fraction(0)] * dim
    vec[col] = Fraction(1)
    for r, pc in enumerate(pivots):
        vec[pc] = -mat[r][col]
    return tuple(vec)


def _recession_ray(P: DelzantPolytope) -> tuple[Fraction, ...] | None:
    """A nonzero direction r with <v_i, r> >= 0 for all facets, if one exists.

    The recession cone is trivial iff the polyhedron is bounded.  If the
    normals do not span R^d their common kernel is recession; otherwise the
    cone is pointed, so any nonzero element lies on an extreme ray cut out
    by d-1 of the normals, and scanning those kernel lines is exhaustive.
    """
    d = P.dim
    common = _nullspace_vector(P.normals, d)
    if common is not None:
        return common
    if d == 1:
        for r in ((Fraction(1),), (Fraction(-1),)):
            if all(v[0] * r[0] >= 0 for v in P.normals):
                return r
        return None
    for subset in combinations(range(P.nfacets), d - 1):
        rows = [P.normals[i] for i in subset]
        if _rank(rows) != d - 1:
            continue
        direction = _nullspace_vector(rows, d)
        if direction is None:
            continue
        for cand in (direction, tuple(-x for x in direction)):
            if all(sum(v[j] * cand[j] for j in range(d)) >= 0 for v in P.normals):
                return cand
    return None


@dataclass(frozen=True)
class VertexDiagnostic:
    vertex: tuple[Fraction, ...]
    active_facets: tuple[int, ...]
    integral: bool
    simple: bool
    cone_det: int | None  # |det| of meeting normals when simple

    @property
    def unimodular(self) -> bool:
        return self.simple and self.cone_det is not None and abs(self.cone_det) == 1


@dataclass(frozen=True)
class DelzantReport:
    passed: bool
    bounded: bool
    has_interior: bool
    vertex_diagnostics: tuple[VertexDiagnostic, ...] = ()
    messages: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.passed


def vertices(P: DelzantPolytope) -> list[tuple[Fraction, ...]]:
    """All 0-dimensional faces, solved exactly from facet equalities.

    Raises ValueError when a feasible basic point saturates more than d
    facets (non-simple configuration); boundedness is not assumed.
    """
    d = P.dim
    found: dict[tuple[Fraction, ...], None] = {}
    for subset in combinations(range(P.nfacets), d):
        rows = [P.normals[i] for i in subset]
        rhs = [Fraction(-P.offsets[i]) for i in subset]
        x = _solve_square(rows, rhs)
        if x is None:
            continue
        if all(val >= 0 for val in P.facet_values(x)):
            found.setdefault(x, None)
    return sorted(found.keys())


def validate_delzant(P: DelzantPolytope) -> DelzantReport:
    """Full validation: bounded, nonempty interior, integral vertices, unimodular cones."""
    messages: list[str] = []
    ray = _recession_ray(P)
    bounded = ray is None
    if not bounded:
        messages.append(f"polytope is unbounded along direction {tuple(map(str, ray))}")

    verts = vertices(P)
    if not verts:
        return DelzantReport(False, bounded, False, (), tuple(messages + ["no vertices found"]))

    diagnostics: list[VertexDiagnostic] = []
    for x in verts:
        active = tuple(i for i, val in enumerate(P.facet_values(x)) if val == 0)
        integral = all(c.denominator == 1 for c in x)
        simple = len(active) == P.dim
        cone_det = _det([P.normals[i] for i in active]) if simple else None
        diagnostics.append(VertexDiagnostic(x, active, integral, simple, cone_det))
        if not integral:
            messages.append(f"vertex {tuple(map(str, x))} is not integral")
        if not simple:
            messages.append(
                f"vertex {tuple(map(str, x))} lies on {len(active)} facets (not simple)"
            )
        elif abs(cone_det) != 1:
            messages.append(
                f"vertex {tuple(map(str, x))} has cone determinant {cone_det}"
            )

    has_interior = _has_interior(P, verts)
    if not has_interior:
        messages.append("polytope has empty interior")
    passed = (
        bounded
        and has_interior
        and all(dg.integral and dg.unimodular for dg in diagnostics)
    )
    return DelzantReport(passed, bounded, has_interior, tuple(diagnostics), tuple(messages))


def _has_interior(P: DelzantPolytope, verts: list[tuple[Fraction, ...]]) -> bool:
    # The barycentre of the vertices is interior iff the polytope is full
    # dimensional (it is a convex combination of all vertices).
    if not verts:
        return False
    d = P.dim
    k = Fraction(1, len(verts))
    bary = tuple(sum(v[j] for v in verts) * k for j in range(d))
    return all(val > 0 for val in P.facet_values(bary))


def lattice_points(P: DelzantPolytope, n: int) -> list[LatticePoint]:
    """All m in Z^d with <v_i, m> + n a_i >= 0, i.e. the lattice points of n*Delta.

    Bounding box from the exact vertices of the dilate, then facet
    filtering; sorted lexicographically.
    """
    if n < 0:
        raise ValueError("dilation factor must be nonnegative")
    verts = vertices(P)
    if not verts:
        raise ValueError("polytope has no vertices; run validate_delzant first")
    d = P.dim
    los = [math.ceil(min(v[j] for v in verts) * n) for j in range(d)]
    his = [math.floor(max(v[j] for v in verts) * n) for j in range(d)]
    points: list[LatticePoint] = []

    def scan(prefix: list[int], j: int):
        if j == d:
            m = tuple(prefix)
            if all(val >= 0 for val in P.facet_values(m, n)):
                points.append(m)
            return
        for c in range(los[j], his[j] + 1):
            prefix.append(c)
            scan(prefix, j + 1)
            prefix.pop()

    scan([], 0)
    return points


def contains(P: DelzantPolytope, n: int | float, x: Sequence, slack: float = 0.0) -> bool:
    """Whether x lies in the n-th dilate, up to the given facet slack."""
    if len(x) != P.dim:
        raise ValueError(f"point must have dimension {P.dim}")
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    return all(val >= -slack for val in P.facet_values(x, n))


def worst_facet_slack(P: DelzantPolytope, n: int | float, x: Sequence) -> float:
    """min_i <v_i, x> + n a_i; nonnegative iff x lies in the n-th dilate."""
    return float(min(P.facet_values(x, n)))


def parse_polytope_dict(data: dict) -> DelzantPolytope:
    """Build a polytope from the JSON wire format, with field diagnostics."""
    if not isinstance(data, dict):
        raise ValueError("polytope file must contain a JSON object")
    try:
        dim = int(data["dim"])
    except (KeyError, TypeError, ValueError):
        raise ValueError('field "dim": expected a positive integer')
    normals = data.get("normals")
    offsets = data.get("offsets")
    if not isinstance(normals, list) or not normals:
        raise ValueError('field "normals": expected a nonempty list of integer rows')
    for k, row in enumerate(normals):
        if not isinstance(row, list) or len(row) != dim:
            raise ValueError(f'field "normals", row {k}: expected {dim} integers')
        if not all(isinstance(x, int) for x in row):
            raise ValueError(f'field "normals", row {k}: entries must be integers')
    if not isinstance(offsets, list) or len(offsets) != len(normals):
        got = len(offsets) if isinstance(offsets, list) else type(offsets).__name__
        raise ValueError(
            f'field "offsets": expected {len(normals)} integers (one per normal), got {got}'
        )
    if not all(isinstance(x, int) for x in offsets):
        raise ValueError('field "offsets": entries must be integers')
    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise ValueError('field "name": expected a string')
    return DelzantPolytope(dim, tuple(tuple(r) for r in normals), tuple(offsets), name)


def polytope_to_dict(P: DelzantPolytope) -> dict:
    out = {
        "dim": P.dim,
        "normals": [list(v) for v in P.normals],
        "offsets": list(P.offsets),
    }
    if P.name is not None:
        out["name"] = P.name
    return out


def load_polytope(path) -> DelzantPolytope:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return parse_polytope_dict(data)

"""The deformed homogeneous coordinate ring on its weight basis.

The graded piece of degree n has one basis label e_{n,m} per lattice point
m of the n-th dilate of the polytope, and the product of two basis labels
is the sum label scaled by a phase depending only on the R-matrix and the
weights:

    e_{n1,m1} * e_{n2,m2} = exp(i pi C(m1, m2)) e_{n1+n2, m1+m2}.

With the lattice normalized to Z^d this single formula carries the whole
deformation; at C = 0 it degenerates to the semigroup ring of the
polytope.  Phases are kept as exponents (exact rationals whenever C is
exact) and only exponentiated at output, so associativity and the
commutation relations can be asserted with ``==`` rather than tolerances.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .polytope import DelzantPolytope, LatticePoint, lattice_points
from .rmatrix import ExactComplex, RMatrix, pair, pair_exact

__all__ = [
    "WeightedSection",
    "RingElement",
    "StructureConstant",
    "StructureConstantTable",
    "basis",
    "phase",
    "phase_exponent",
    "phase_exact_value",
    "star",
    "commutation_factor",
    "structure_constants",
    "hilbert_function",
]


@dataclass(frozen=True, slots=True, order=True)
class WeightedSection:
    """Basis label (degree n, weight m) with m a lattice point of n*Delta."""

    degree: int
    weight: LatticePoint


def section(P: DelzantPolytope, degree: int, weight: Sequence[int]) -> WeightedSection:
    """Construct a basis label, checking membership of the weight in the dilate."""
    m = tuple(int(x) for x in weight)
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if not all(val >= 0 for val in P.facet_values(m, degree)):
        raise ValueError(f"weight {m} does not lie in the degree-{degree} dilate")
    return WeightedSection(degree, m)


class RingElement:
    """Finite complex linear combination of weighted-section basis labels."""

    __slots__ = ("polytope", "terms")

    def __init__(self, P: DelzantPolytope, terms: dict[WeightedSection, complex] | None = None):
        self.polytope = P
        self.terms: dict[WeightedSection, complex] = {}
        if terms:
            for key, coeff in terms.items():
                if coeff != 0:
                    self.terms[key] = complex(coeff)

    @classmethod
    def basis_element(cls, P: DelzantPolytope, degree: int, weight: Sequence[int],
                      coeff: complex = 1.0) -> "RingElement":
        return cls(P, {section(P, degree, weight): coeff})

    def __add__(self, other: "RingElement") -> "RingElement":
        if other.polytope != self.polytope:
            raise ValueError("ring elements live over different polytopes")
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            new = out.get(key, 0) + coeff
            if new == 0:
                out.pop(key, None)
            else:
                out[key] = new
        return RingElement(self.polytope, out)

    def scale(self, k: complex) -> "RingElement":
        return RingElement(self.polytope, {key: k * c for key, c in self.terms.items()})

    def coefficient(self, degree: int, weight: Sequence[int]) -> complex:
        return self.terms.get(WeightedSection(degree, tuple(weight)), 0j)

    def degrees(self) -> set[int]:
        return {key.degree for key in self.terms}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RingElement)
            and self.polytope == other.polytope
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        items = ", ".join(
            f"{c!r}*e[{k.degree},{k.weight}]" for k, c in sorted(self.terms.items())
        )
        return f"RingElement({items or '0'})"

    def isclose(self, other: "RingElement", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys
        )


def basis(P: DelzantPolytope, n: int) -> list[WeightedSection]:
    """Ordered weight basis of the degree-n graded piece."""
    return [WeightedSection(n, m) for m in lattice_points(P, n)]


def phase_exponent(C: RMatrix, m1: Sequence[int], m2: Sequence[int]):
    """The exponent E with e_{m1} * e_{m2} carrying factor exp(i pi E).

    Returns an ExactComplex when C is exact, else a complex float.
    """
    if C.is_exact:
        return pair_exact(C, m1, m2)
    return pair(C, m1, m2)


def phase(C: RMatrix, m1: Sequence[int], m2: Sequence[int]) -> complex:
    """The deformation factor exp(i pi C(m1, m2)) on a pair of weights."""
    exact = phase_exact_value(phase_exponent(C, m1, m2))
    if exact is not None:
        return exact
    return cmath.exp(1j * cmath.pi * pair(C, m1, m2))


_QUARTER_TURNS = {Fraction(0): 1 + 0j, Fraction(1, 2): 1j, Fraction(1): -1 + 0j, Fraction(3, 2): -1j}


def phase_exact_value(exponent) -> complex | None:
    """Exact value of exp(i pi E) when E is rational with denominator 1 or 2."""
    if not isinstance(exponent, ExactComplex):
        return None
    if exponent.im != 0:
        return None
    reduced = exponent.re % 2
    return _QUARTER_TURNS.get(reduced)


def star(C: RMatrix, P: DelzantPolytope, a: RingElement, b: RingElement) -> RingElement:
    """Bilinear extension of the basis product; grading adds, phases multiply."""
    if a.polytope != P or b.polytope != P:
        raise ValueError("ring elements live over different polytopes")
    if C.dim != P.dim:
        raise ValueError("R-matrix dimension does not match the polytope")
    out: dict[WeightedSection, complex] = {}
    for k1, c1 in a.terms.items():
        for k2, c2 in b.terms.items():
            weight = tuple(x + y for x, y in zip(k1.weight, k2.weight))
            degree = k1.degree + k2.degree
            # Convexity puts the sum inside the dilate; anything else is a bug.
            assert all(val >= 0 for val in P.facet_values(weight, degree)), (
                f"product weight {weight} escaped the degree-{degree} dilate"
            )
            key = WeightedSection(degree, weight)
            coeff = out.get(key, 0) + c1 * c2 * phase(C, k1.weight, k2.weight)
            if coeff == 0:
                out.pop(key, None)
            else:
                out[key] = coeff
    return RingElement(P, out)


def commutation_factor(C: RMatrix, m1: Sequence[int], m2: Sequence[int]) -> complex:
    """Factor q with e_{m1} * e_{m2} = q * (e_{m2} * e_{m1}); equals exp(2 pi i C(m1,m2))."""
    exponent = phase_exponent(C, m1, m2)
    if isinstance(exponent, ExactComplex):
        doubled = exponent + exponent
        exact = phase_exact_value(doubled)
        if exact is not None:
            return exact
        exponent = exponent.to_complex()
    return cmath.exp(2j * cmath.pi * exponent)


@dataclass(frozen=True, slots=True)
class StructureConstant:
    m1: LatticePoint
    n1: int
    m2: LatticePoint
    n2: int
    target: LatticePoint
    factor: complex
    exponent: complex  # log-factor: factor == exp(exponent)

    def to_dict(self) -> dict:
        return {
            "m1": list(self.m1),
            "n1": self.n1,
            "m2": list(self.m2),
            "n2": self.n2,
            "target": list(self.target),
            "factor": {"re": self.factor.real, "im": self.factor.imag},
            "exponent": {"re": self.exponent.real, "im": self.exponent.imag},
        }


@dataclass(frozen=True)
class StructureConstantTable:
    n1: int
    n2: int
    entries: tuple[StructureConstant, ...]

    def lookup(self, m1: Sequence[int], m2: Sequence[int]) -> StructureConstant:
        t1, t2 = tuple(m1), tuple(m2)
        for entry in self.entries:
            if entry.m1 == t1 and entry.m2 == t2:
                return entry
        raise KeyError(f"no entry for weights {t1}, {t2}")

    def to_list(self) -> list[dict]:
        return [entry.to_dict() for entry in self.entries]


def structure_constants(C: RMatrix, P: DelzantPolytope, n1: int, n2: int) -> StructureConstantTable:
    """Tabulate the basis products of degrees (n1, n2), in lexicographic order."""
    rows = []
    for k1 in basis(P, n1):
        for k2 in basis(P, n2):
            target = tuple(x + y for x, y in zip(k1.weight, k2.weight))
            exponent = 1j * cmath.pi * pair(C, k1.weight, k2.weight)
            rows.append(
                StructureConstant(
                    k1.weight, n1, k2.weight, n2, target,
                    phase(C, k1.weight, k2.weight), exponent,
                )
            )
    return StructureConstantTable(n1, n2, tuple(rows))


def hilbert_function(P: DelzantPolytope, nmax: int) -> list[int]:
    """Graded dimensions [dim A_n for n = 0..nmax]; independent of the R-matrix."""
    return [len(lattice_points(P, n)) for n in range(nmax + 1)]

"""Bohr-Sommerfeld fibre counts and torus characters of the section spaces.

For a Delzant polytope the fibres of the holomorphic moment map that both
satisfy the integrality condition and meet the brane are labelled by the
lattice points of the dilated polytope; each contributes a one-dimensional
summand.  The counts therefore coincide with the graded dimensions of the
coordinate ring, and none of this depends on the R-matrix (the deformation
moves the brane but not the set of fibres meeting it).
"""

from __future__ import annotations

from dataclasses import dataclass

from .polytope import DelzantPolytope, LatticePoint, lattice_points

__all__ = ["BSFibre", "Character", "bs_fibres", "hom_dimension", "character"]


@dataclass(frozen=True, slots=True, order=True)
class BSFibre:
    """Bohr-Sommerfeld fibre label: degree n and lattice weight m.

    The fibre itself sits over xi = m/i in the complexified moment
    coordinates; only the lattice representative is carried around.
    """

    degree: int
    weight: LatticePoint


@dataclass(frozen=True)
class Character:
    """Weight multiset of the degree-n section space (all multiplicities 1)."""

    degree: int
    weights: tuple[LatticePoint, ...]

    def __len__(self) -> int:
        return len(self.weights)

    def multiplicity(self, weight) -> int:
        return self.weights.count(tuple(weight))

    def to_dict(self) -> dict:
        return {"degree": self.degree, "weights": [list(w) for w in self.weights]}


def bs_fibres(P: DelzantPolytope, n: int) -> list[BSFibre]:
    """One fibre per lattice point of the n-th dilate."""
    return [BSFibre(n, m) for m in lattice_points(P, n)]


def hom_dimension(P: DelzantPolytope, n: int) -> int:
    """Dimension of the degree-n morphism space: the number of fibres.

    Each fibre carries a one-dimensional space of flat sections, so the
    dimension is the count; the R-matrix deliberately does not appear.
    """
    return len(bs_fibres(P, n))


def character(P: DelzantPolytope, n: int) -> Character:
    """The torus character of degree n: every lattice weight once."""
    return Character(n, tuple(lattice_points(P, n)))

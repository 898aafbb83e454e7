"""Noncommutative toric varieties: deformed coordinate rings and their groupoid machinery.

The package has three layers:

* exact combinatorics and algebra: ``polytope``, ``rmatrix``, ``ncring``,
  ``quantization`` (integer/rational arithmetic throughout);
* numerical geometry: ``groupoid`` (deformed cotangent-groupoid structure
  maps) and ``toric_flows`` (Kaehler charts, Poisson flows and the flow
  identities they satisfy);
* the ``cli`` front end, which emits deterministic JSON reports.
"""

from .polytope import DelzantPolytope, lattice_points, standard, validate_delzant, vertices
from .rmatrix import RMatrix, decompose, pair, contract

__all__ = [
    "DelzantPolytope",
    "RMatrix",
    "contract",
    "decompose",
    "lattice_points",
    "pair",
    "standard",
    "validate_delzant",
    "vertices",
]

__version__ = "0.1.0"

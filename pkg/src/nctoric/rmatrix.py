"""Triangular R-matrices on the complexified torus Lie algebra.

An R-matrix here is simply an antisymmetric complex d x d matrix C.  It
drives every deformation in the package: the ring phases, the groupoid
structure maps and the Poisson flows all consume C only through the two
contractions implemented in this module,

* ``pair(C, u, v)``      = sum_ij C_ij u_i v_j          (bilinear form)
* ``contract(C, alpha)`` = (sum_j C_ij alpha_j)_i       (index convention fixed here)

Entries are kept as exact complex rationals whenever the input allows it
(ints, rational strings such as ``"1/3"``, decimal strings), with a float
matrix alongside for numerics.  Exactness is what makes the ring's
associativity and commutation tests assertable with ``==``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ExactComplex",
    "RMatrix",
    "RealImagParts",
    "RMatrixValidation",
    "validate",
    "pair",
    "pair_exact",
    "contract",
    "decompose",
    "load_rmatrix",
    "parse_rmatrix_dict",
]


@dataclass(frozen=True, slots=True)
class ExactComplex:
    """Complex number with Fraction real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __add__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "ExactComplex":
        return ExactComplex(-self.re, -self.im)

    def scale(self, k: int | Fraction) -> "ExactComplex":
        return ExactComplex(self.re * k, self.im * k)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))


_EXACT_ZERO = ExactComplex()


def _parse_exact_scalar(value) -> ExactComplex | None:
    """Parse one matrix entry into an exact complex rational, if possible.

    ints and rational/decimal strings are exact; floats are taken at face
    value only when they are integral (a JSON ``0.5`` may be a rounded
    decimal, so it drops the matrix to float mode).
    """
    if isinstance(value, ExactComplex):
        return value
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return ExactComplex(Fraction(value))
    if isinstance(value, Fraction):
        return ExactComplex(value)
    if isinstance(value, float):
        return ExactComplex(Fraction(int(value))) if value == int(value) else None
    if isinstance(value, str):
        try:
            return ExactComplex(Fraction(value))
        except (ValueError, ZeroDivisionError):
            return None
    return None


def _as_float_scalar(value) -> float:
    if isinstance(value, str):
        return float(Fraction(value))
    if isinstance(value, ExactComplex):
        if value.im != 0:
            raise ValueError("real/imaginary parts must be real scalars")
        return float(value.re)
    return float(value)


class RMatrix:
    """Antisymmetric complex d x d matrix with an optional exact view.

    ``entries`` is the float matrix used by numerics.  ``exact`` is a tuple
    of tuples of :class:`ExactComplex` when every input entry was exactly
    representable, else ``None``.
    """

    __slots__ = ("dim", "entries", "exact")

    def __init__(self, re_rows: Sequence[Sequence], im_rows: Sequence[Sequence] | None = None):
        re_rows = [list(row) for row in re_rows]
        d = len(re_rows)
        if d == 0 or any(len(row) != d for row in re_rows):
            raise ValueError("R-matrix must be a nonempty square matrix")
        if im_rows is None:
            im_rows = [[0] * d for _ in range(d)]
        else:
            im_rows = [list(row) for row in im_rows]
            if len(im_rows) != d or any(len(row) != d for row in im_rows):
                raise ValueError("imaginary part shape does not match real part")

        self.dim = d
        self.entries = np.empty((d, d), dtype=complex)
        exact_rows: list[tuple[ExactComplex, ...]] = []
        all_exact = True
        for i in range(d):
            row_exact: list[ExactComplex] = []
            for j in range(d):
                re_x = _parse_exact_scalar(re_rows[i][j])
                im_x = _parse_exact_scalar(im_rows[i][j])
                if re_x is None or im_x is None or re_x.im != 0 or im_x.im != 0:
                    all_exact = False
                    row_exact.append(_EXACT_ZERO)
                else:
                    row_exact.append(ExactComplex(re_x.re, im_x.re))
                self.entries[i, j] = complex(
                    _as_float_scalar(re_rows[i][j]), _as_float_scalar(im_rows[i][j])
                )
            exact_rows.append(tuple(row_exact))
        self.exact = tuple(exact_rows) if all_exact else None

    @classmethod
    def zero(cls, dim: int) -> "RMatrix":
        return cls([[0] * dim for _ in range(dim)])

    @classmethod
    def from_upper(cls, dim: int, upper: dict[tuple[int, int], complex | str | int | Fraction]) -> "RMatrix":
        """Build from entries above the diagonal, 0-indexed; the rest follows by antisymmetry."""
        re = [[Fraction(0)] * dim for _ in range(dim)]
        im = [[Fraction(0)] * dim for _ in range(dim)]
        for (i, j), value in upper.items():
            if not (0 <= i < j < dim):
                raise ValueError(f"index pair {(i, j)} is not strictly upper triangular")
            if isinstance(value, str):
                re_v, im_v = Fraction(value), Fraction(0)
            elif isinstance(value, complex):
                re_v, im_v = value.real, value.imag
            else:
                re_v, im_v = value, Fraction(0)
            re[i][j], re[j][i] = re_v, -re_v
            im[i][j], im[j][i] = im_v, -im_v
        return cls(re, im)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def exact_entry(self, i: int, j: int) -> ExactComplex:
        if self.exact is None:
            raise ValueError("R-matrix has no exact representation")
        return self.exact[i][j]

    def __repr__(self) -> str:
        return f"RMatrix(dim={self.dim}, entries={self.entries.tolist()!r})"


@dataclass(frozen=True, slots=True)
class RealImagParts:
    """Real and imaginary antisymmetric parts of an R-matrix, C = A + iB."""

    A: np.ndarray
    B: np.ndarray


@dataclass(frozen=True, slots=True)
class RMatrixValidation:
    passed: bool
    failures: tuple[tuple[int, int], ...]  # offending (row, col), 1-indexed

    def __bool__(self) -> bool:
        return self.passed


def validate(C: RMatrix) -> RMatrixValidation:
    """Check antisymmetry to exact equality, reporting offending index pairs."""
    failures: list[tuple[int, int]] = []
    for i in range(C.dim):
        for j in range(i, C.dim):
            if C.exact is not None:
                ok = (C.exact[i][j] + C.exact[j][i]).is_zero()
            else:
                ok = C.entries[i, j] == -C.entries[j, i]
            if i == j:
                ok = ok and C.entries[i, i] == 0
            if not ok:
                failures.append((j + 1, i + 1) if j > i else (i + 1, j + 1))
    return RMatrixValidation(not failures, tuple(failures))


def pair(C: RMatrix, u: Iterable, v: Iterable) -> complex:
    """The bilinear form C(u, v) = sum_ij C_ij u_i v_j."""
    u = np.asarray(list(u) if not isinstance(u, np.ndarray) else u, dtype=complex)
    v = np.asarray(list(v) if not isinstance(v, np.ndarray) else v, dtype=complex)
    if u.shape != (C.dim,) or v.shape != (C.dim,):
        raise ValueError(f"vectors must have dimension {C.dim}")
    return complex(u @ C.entries @ v)


def pair_exact(C: RMatrix, u: Sequence[int], v: Sequence[int]) -> ExactComplex:
    """Exact C(u, v) for integer vectors; requires an exact R-matrix."""
    if C.exact is None:
        raise ValueError("pair_exact requires an exact R-matrix")
    if len(u) != C.dim or len(v) != C.dim:
        raise ValueError(f"vectors must have dimension {C.dim}")
    acc = _EXACT_ZERO
    for i, ui in enumerate(u):
        if ui == 0:
            continue
        for j, vj in enumerate(v):
            if vj == 0:
                continue
            acc = acc + C.exact[i][j].scale(Fraction(ui) * Fraction(vj))
    return acc


def contract(C: RMatrix, alpha: Iterable) -> np.ndarray:
    """The covector contraction (C(alpha))_i = sum_j C_ij alpha_j.

    The index convention satisfies <u, contract(C, alpha)> = pair(C, u, alpha).
    """
    alpha = np.asarray(list(alpha) if not isinstance(alpha, np.ndarray) else alpha, dtype=complex)
    if alpha.shape != (C.dim,):
        raise ValueError(f"covector must have dimension {C.dim}")
    return C.entries @ alpha


def decompose(C: RMatrix) -> RealImagParts:
    """Split C = A + iB into real antisymmetric parts."""
    return RealImagParts(A=C.entries.real.copy(), B=C.entries.imag.copy())


def parse_rmatrix_dict(data: dict) -> RMatrix:
    """Build an RMatrix from the JSON wire format {"dim", "re", "im"}.

    Numbers may be strings for exact rationals ("1/3").  Shape mismatches
    and asymmetry are reported with the offending field or index pair.
    """
    if not isinstance(data, dict):
        raise ValueError("R-matrix file must contain a JSON object")
    try:
        dim = int(data["dim"])
        re_rows = data["re"]
        im_rows = data.get("im")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"R-matrix file is missing or malforms a required field: {exc}") from exc
    if not isinstance(re_rows, list) or len(re_rows) != dim:
        raise ValueError(f'field "re": expected {dim} rows, got {len(re_rows) if isinstance(re_rows, list) else type(re_rows).__name__}')
    for k, row in enumerate(re_rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ValueError(f'field "re", row {k}: expected {dim} entries')
    if im_rows is not None:
        if not isinstance(im_rows, list) or len(im_rows) != dim:
            raise ValueError(f'field "im": expected {dim} rows')
        for k, row in enumerate(im_rows):
            if not isinstance(row, list) or len(row) != dim:
                raise ValueError(f'field "im", row {k}: expected {dim} entries')
    C = RMatrix(re_rows, im_rows)
    report = validate(C)
    if not report.passed:
        i, j = report.failures[0]
        raise ValueError(f"R-matrix is not antisymmetric at entry ({i},{j})")
    return C


def load_rmatrix(path) -> RMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return parse_rmatrix_dict(data)

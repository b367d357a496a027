"""Exact rational linear algebra and subspaces of Q^3.

Everything here works on :class:`fractions.Fraction` entries; nothing is ever
rounded.  Matrices are immutable row-major tuples.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Rational",
    "RationalMatrix",
    "SingularMatrix",
    "Subspace",
    "to_rational",
    "rref",
    "rank",
    "solve",
    "inverse",
    "nullspace",
    "range_of_adjoint",
    "intersect",
    "sum_span",
    "contains",
    "equal",
]

Rational = Fraction


class SingularMatrix(ValueError):
    pass


def to_rational(value) -> Fraction:
    """Parse ints, Fractions or strings like ``"-3/4"`` into a Fraction.

    Floats are rejected so that rounding can never leak into exact code.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} to an exact rational")


class RationalMatrix:
    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(to_rational(x) for x in row) for row in rows)
        if not data:
            raise ValueError("matrix needs at least one row")
        ncols = len(data[0])
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged rows")
        self._data = data
        self.rows = len(data)
        self.cols = ncols

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def column(cls, values: Sequence) -> "RationalMatrix":
        return cls([[v] for v in values])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._data)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def __iter__(self):
        return iter(self._data)

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalMatrix) and self._data == other._data

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._data)
        return f"RationalMatrix([{body}])"

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self._data))

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        ocols = list(zip(*other._data))
        return RationalMatrix(
            [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in ocols] for r in self._data]
        )

    def __mul__(self, scalar) -> "RationalMatrix":
        s = to_rational(scalar)
        return RationalMatrix([[s * x for x in r] for r in self._data])

    __rmul__ = __mul__

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RationalMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + other * -1

    def hstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.rows != other.rows:
            raise ValueError("row count mismatch")
        return RationalMatrix([r + s for r, s in zip(self._data, other._data)])

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def det(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        m = [list(r) for r in self._data]
        n = self.rows
        d = Fraction(1)
        for c in range(n):
            p = next((r for r in range(c, n) if m[r][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                m[c], m[p] = m[p], m[c]
                d = -d
            d *= m[c][c]
            for r in range(c + 1, n):
                f = m[r][c] / m[c][c]
                if f:
                    for k in range(c, n):
                        m[r][k] -= f * m[c][k]
        return d

    def to_float(self):
        import numpy as np

        return np.array([[float(x) for x in r] for r in self._data], dtype=float)


def _as_matrix(m) -> RationalMatrix:
    return m if isinstance(m, RationalMatrix) else RationalMatrix(m)


def rref(m) -> tuple[RationalMatrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    m = _as_matrix(m)
    a = [list(r) for r in m]
    nrows, ncols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return RationalMatrix(a), pivots


def rank(m) -> int:
    return len(rref(m)[1])


def solve(a, b) -> RationalMatrix | None:
    """One exact solution of ``a x = b`` or ``None`` if inconsistent.

    Free variables are set to zero, so the answer is deterministic.
    ``b`` may be a column matrix or a flat sequence.
    """
    a = _as_matrix(a)
    if not isinstance(b, RationalMatrix):
        b = RationalMatrix.column(b)
    if b.rows != a.rows or b.cols != 1:
        raise ValueError("right-hand side must be a column with matching rows")
    red, piv = rref(a.hstack(b))
    n = a.cols
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv):
        x[c] = red[i, n]
    return RationalMatrix.column(x)


def inverse(a) -> RationalMatrix:
    a = _as_matrix(a)
    n = a.rows
    if a.cols != n:
        raise ValueError("inverse of a non-square matrix")
    red, piv = rref(a.hstack(RationalMatrix.identity(n)))
    if piv[:n] != list(range(n)):
        raise SingularMatrix("matrix is singular")
    return RationalMatrix([r[n:] for r in red])


def nullspace(a) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel, one vector per free column."""
    a = _as_matrix(a)
    red, piv = rref(a)
    free = [c for c in range(a.cols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * a.cols
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -red[i, f]
        basis.append(tuple(v))
    return basis


class Subspace:
    """A subspace of Q^n stored by its canonical basis.

    The basis is the list of nonzero rows of the RREF of any spanning set,
    so two subspaces are equal exactly when their stored bases are.
    """

    __slots__ = ("ambient_dim", "vectors")

    def __init__(self, vectors: Iterable[Sequence], ambient_dim: int = 3):
        vecs = [tuple(to_rational(x) for x in v) for v in vectors]
        if any(len(v) != ambient_dim for v in vecs):
            raise ValueError("vector length differs from ambient dimension")
        self.ambient_dim = ambient_dim
        if vecs:
            red, piv = rref(vecs)
            self.vectors = tuple(red.row(i) for i in range(len(piv)))
        else:
            self.vectors = ()

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @property
    def basis(self) -> RationalMatrix | None:
        """Basis vectors as matrix columns (``None`` for the zero space)."""
        if not self.vectors:
            return None
        return RationalMatrix(self.vectors).T

    def first(self) -> tuple[Fraction, ...]:
        return self.vectors[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.vectors == other.vectors
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.vectors))

    def __repr__(self) -> str:
        vs = ", ".join("(" + ",".join(str(x) for x in v) + ")" for v in self.vectors)
        return f"Subspace[{vs}]"

    def __contains__(self, v: Sequence) -> bool:
        return sum_span(self, Subspace([v], self.ambient_dim)).dim == self.dim


def range_of_adjoint(p) -> Subspace:
    """Column space of ``p.T``, i.e. the row space of ``p``."""
    p = _as_matrix(p)
    return Subspace(list(p), p.cols)


def sum_span(s: Subspace, t: Subspace) -> Subspace:
    _check_ambient(s, t)
    return Subspace(s.vectors + t.vectors, s.ambient_dim)


def intersect(s: Subspace, t: Subspace) -> Subspace:
    _check_ambient(s, t)
    n = s.ambient_dim
    if s.dim == 0 or t.dim == 0:
        return Subspace([], n)
    # x = S a = T b  <=>  [S | -T] (a, b) = 0
    stacked = s.basis.hstack(t.basis * -1)
    vecs = []
    for k in nullspace(stacked):
        a = k[: s.dim]
        vecs.append(tuple(sum((ai * v[i] for ai, v in zip(a, s.vectors)), Fraction(0)) for i in range(n)))
    return Subspace(vecs, n)


def contains(s: Subspace, t: Subspace) -> bool:
    """True when t is a subspace of s."""
    return sum_span(s, t) == s


def equal(s: Subspace, t: Subspace) -> bool:
    return s == t


def _check_ambient(s: Subspace, t: Subspace) -> None:
    if s.ambient_dim != t.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")

"""Exact arithmetic over GF(p) and dense Gauss-Jordan linear algebra.

Vectors and matrices are int64 numpy arrays whose entries are kept reduced
into ``[0, p)``.  Every system handled by this package is small (a few hundred
unknowns at most), so plain dense elimination is used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class PrimeField:
    """The prime field GF(p)."""

    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise ValueError(f"field characteristic must be prime, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def reduce(self, a) -> np.ndarray:
        return np.mod(np.asarray(a, dtype=np.int64), self.p)

    def inv(self, a: int) -> int:
        return inv(a, self.p)

    def neg(self, a: int) -> int:
        return (-int(a)) % self.p

    def elements(self) -> range:
        return range(self.p)

    def vector(self, entries: Iterable[int]) -> "FpVector":
        return FpVector(self, entries)

    def matrix(self, rows: Sequence[Sequence[int]]) -> "FpMatrix":
        return FpMatrix(self, rows)

    def zeros(self, *shape: int) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64)


def inv(a: int, p: int) -> int:
    """Multiplicative inverse of ``a`` modulo the prime ``p``."""
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse in GF({p})")
    return pow(a, p - 2, p)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.int64)
    arr.setflags(write=False)
    return arr


class FpVector:
    """An immutable vector over a fixed prime field."""

    __slots__ = ("field", "entries")

    def __init__(self, field: PrimeField, entries: Iterable[int]) -> None:
        self.field = field
        if not isinstance(entries, np.ndarray):
            entries = list(entries)
        self.entries = _frozen(field.reduce(entries).reshape(-1))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return (int(a) for a in self.entries)

    def __getitem__(self, i: int) -> int:
        return int(self.entries[i])

    def _check(self, other: "FpVector") -> None:
        if not isinstance(other, FpVector) or other.field != self.field:
            raise TypeError("cannot mix vectors from different fields")
        if len(other) != len(self):
            raise ValueError("vector lengths differ")

    def __add__(self, other: "FpVector") -> "FpVector":
        self._check(other)
        return FpVector(self.field, self.entries + other.entries)

    def __sub__(self, other: "FpVector") -> "FpVector":
        self._check(other)
        return FpVector(self.field, self.entries - other.entries)

    def __rmul__(self, scalar: int) -> "FpVector":
        return FpVector(self.field, int(scalar) * self.entries)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FpVector)
            and other.field == self.field
            and np.array_equal(other.entries, self.entries)
        )

    def __hash__(self) -> int:
        return hash((self.field.p, tuple(self)))

    def is_zero(self) -> bool:
        return not self.entries.any()

    def __repr__(self) -> str:
        return f"FpVector({self.field!r}, {list(self)})"


class FpMatrix:
    """An immutable row-major matrix over a fixed prime field."""

    __slots__ = ("field", "entries")

    def __init__(self, field: PrimeField, rows) -> None:
        arr = np.asarray(rows, dtype=np.int64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ValueError("matrix entries must form a 2-d array")
        self.field = field
        self.entries = _frozen(field.reduce(arr))

    @classmethod
    def zero(cls, field: PrimeField, rows: int, cols: int) -> "FpMatrix":
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> "FpMatrix":
        return cls(field, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __matmul__(self, other):
        if isinstance(other, FpVector):
            if other.field != self.field:
                raise TypeError("cannot mix a matrix and a vector from different fields")
            return FpVector(self.field, self.entries @ other.entries)
        if isinstance(other, FpMatrix):
            if other.field != self.field:
                raise TypeError("cannot mix matrices from different fields")
            return FpMatrix(self.field, self.entries @ other.entries)
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FpMatrix)
            and other.field == self.field
            and np.array_equal(other.entries, self.entries)
        )

    def __repr__(self) -> str:
        return f"FpMatrix({self.field!r}, {self.entries.tolist()})"


# -- raw array routines, shared by the rest of the package -----------------


def rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` over GF(p) and its pivot columns."""
    a = np.mod(np.array(a, dtype=np.int64), p)
    if a.ndim != 2:
        raise ValueError("rref expects a 2-d array")
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * inv(a[r, c], p)) % p
        col = a[:, c].copy()
        col[r] = 0
        if col.any():
            a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(a: np.ndarray, p: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref(a, p)[1])


def nullspace(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right kernel of ``a`` as the rows of the returned array."""
    a = np.asarray(a, dtype=np.int64)
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    r, pivots = rref(a, p)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for i, c in enumerate(pivots):
            basis[t, c] = (-r[i, f]) % p
    return basis


def row_basis(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the row space of ``a`` (rows of the reduced echelon form)."""
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, a.shape[1] if a.ndim == 2 else 0), dtype=np.int64)
    r, pivots = rref(a, p)
    return r[: len(pivots)]


def solve_raw(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution of ``a @ x = b`` over GF(p), or None when inconsistent."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1)
    ncols = a.shape[1]
    aug = np.concatenate([a.reshape(len(b), ncols), b[:, None]], axis=1)
    r, pivots = rref(aug, p)
    if pivots and pivots[-1] == ncols:
        return None
    x = np.zeros(ncols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = r[i, ncols]
    return x


def in_span(rows: np.ndarray, v: np.ndarray, p: int) -> bool:
    """Whether ``v`` lies in the row span of ``rows``."""
    rows = np.asarray(rows, dtype=np.int64)
    v = np.mod(np.asarray(v, dtype=np.int64).reshape(-1), p)
    if not v.any():
        return True
    if rows.size == 0:
        return False
    return rank(np.vstack([rows, v]), p) == rank(rows, p)


def same_span(a: np.ndarray, b: np.ndarray, p: int) -> bool:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    ra, rb = rank(a, p), rank(b, p)
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(np.vstack([a, b]), p) == ra


def matrix_power(m: np.ndarray, k: int, p: int) -> np.ndarray:
    result = np.eye(m.shape[0], dtype=np.int64)
    base = np.mod(m, p)
    while k:
        if k & 1:
            result = (result @ base) % p
        base = (base @ base) % p
        k >>= 1
    return result


def all_vectors(p: int, n: int) -> np.ndarray:
    """All p**n coordinate vectors, in lexicographic order, as rows."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((p,) * n).reshape(n, -1).T
    return grids.astype(np.int64)


def vector_index(v: np.ndarray, p: int) -> np.ndarray:
    """Position of vector(s) ``v`` in the order of :func:`all_vectors`."""
    v = np.asarray(v, dtype=np.int64)
    n = v.shape[-1]
    weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return np.mod(v, p) @ weights


# -- public operations on FpMatrix / FpVector ------------------------------


@dataclass(frozen=True)
class NoSolution:
    """Returned by :func:`solve` when the system is inconsistent."""

    reason: str = "inconsistent system"
    residual_row: int | None = field(default=None)

    def __bool__(self) -> bool:
        return False


def kernel_basis(m: FpMatrix) -> list[FpVector]:
    return [FpVector(m.field, row) for row in nullspace(m.entries, m.field.p)]


def image_dim(m: FpMatrix) -> int:
    return rank(m.entries, m.field.p)


def solve(m: FpMatrix, b: FpVector) -> FpVector | NoSolution:
    if m.field != b.field:
        raise TypeError("cannot mix a matrix and a vector from different fields")
    if m.rows != len(b):
        raise ValueError(f"matrix has {m.rows} rows but right-hand side has length {len(b)}")
    x = solve_raw(m.entries, b.entries, m.field.p)
    if x is None:
        return NoSolution()
    return FpVector(m.field, x)


def quotient_dim(sub: FpMatrix, total: FpMatrix) -> int:
    """dim span(total rows) - dim span(sub rows); the spans must be nested."""
    return image_dim(total) - image_dim(sub)


__all__ = [
    "PrimeField",
    "FpVector",
    "FpMatrix",
    "NoSolution",
    "inv",
    "is_prime",
    "kernel_basis",
    "image_dim",
    "solve",
    "quotient_dim",
    "rref",
    "rank",
    "nullspace",
    "row_basis",
    "solve_raw",
    "in_span",
    "same_span",
    "matrix_power",
    "all_vectors",
    "vector_index",
]

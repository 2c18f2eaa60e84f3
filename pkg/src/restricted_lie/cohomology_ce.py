"""Chevalley-Eilenberg cochains, differential and cohomology dimensions.

A degree-m cochain is stored on strictly increasing index tuples; coordinates
are ordered lexicographically by tuple and then by module basis index.  The
differential uses

    d phi(x_1..x_{m+1}) = sum_i (-1)^{i+1} x_i . phi(.. x_i^ ..)
                        + sum_{i<j} (-1)^{i+j} phi([x_i, x_j], .. x_i^ .. x_j^ ..)
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from math import comb
from typing import Sequence

import numpy as np

from .algebra import LieModule, as_array
from .gf import nullspace, rank

MAX_DEGREE = 6


@lru_cache(maxsize=None)
def index_tuples(n: int, m: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), m))


@lru_cache(maxsize=None)
def tuple_position(n: int, m: int) -> dict[tuple[int, ...], int]:
    return {t: k for k, t in enumerate(index_tuples(n, m))}


def sort_with_sign(seq: Sequence[int]) -> tuple[int, tuple[int, ...] | None]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0, None
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign, tuple(seq)


def cochain_space_dim(n: int, m: int, module_dim: int) -> int:
    return comb(n, m) * module_dim


class CeCochain:
    """An alternating m-linear map from L to a module M, stored on increasing tuples."""

    def __init__(self, module: LieModule, degree: int, values) -> None:
        n = module.lie.dim
        values = module.field.reduce(values).reshape(comb(n, degree), module.dim)
        values.setflags(write=False)
        self.module = module
        self.degree = degree
        self.values = values

    @classmethod
    def zero(cls, module: LieModule, degree: int) -> "CeCochain":
        return cls(module, degree, np.zeros((comb(module.lie.dim, degree), module.dim), dtype=np.int64))

    @classmethod
    def from_coords(cls, module: LieModule, degree: int, coords) -> "CeCochain":
        return cls(module, degree, coords)

    @classmethod
    def from_function(cls, module: LieModule, degree: int, fn) -> "CeCochain":
        """Sample ``fn(*basis_vectors)`` on increasing basis tuples."""
        n = module.lie.dim
        eye = np.eye(n, dtype=np.int64)
        vals = [as_array(fn(*(eye[i] for i in t)), module.dim) for t in index_tuples(n, degree)]
        return cls(module, degree, np.array(vals, dtype=np.int64).reshape(-1, module.dim))

    @property
    def lie(self):
        return self.module.lie

    @property
    def p(self) -> int:
        return self.module.p

    def coords(self) -> np.ndarray:
        return self.values.reshape(-1).copy()

    def on_basis(self, idx: Sequence[int]) -> np.ndarray:
        sign, t = sort_with_sign(idx)
        if sign == 0:
            return np.zeros(self.module.dim, dtype=np.int64)
        pos = tuple_position(self.lie.dim, self.degree)[t]
        return (sign * self.values[pos]) % self.p

    def tensor(self) -> np.ndarray:
        """The full alternating array of shape (n,)*m + (module_dim,)."""
        n, m = self.lie.dim, self.degree
        full = np.zeros((n,) * m + (self.module.dim,), dtype=np.int64)
        for t, val in zip(index_tuples(n, m), self.values):
            for perm in permutations(range(m)):
                sign, _ = sort_with_sign(perm)
                full[tuple(t[k] for k in perm)] = sign * val
        return full % self.p

    def __call__(self, *vectors) -> np.ndarray:
        if len(vectors) != self.degree:
            raise ValueError(f"cochain of degree {self.degree} got {len(vectors)} arguments")
        out = self.tensor()
        for v in vectors:
            out = np.tensordot(as_array(v, self.lie.dim), out, axes=(0, 0)) % self.p
        return out % self.p

    def __add__(self, other: "CeCochain") -> "CeCochain":
        return CeCochain(self.module, self.degree, self.values + other.values)

    def __sub__(self, other: "CeCochain") -> "CeCochain":
        return CeCochain(self.module, self.degree, self.values - other.values)

    def __rmul__(self, a: int) -> "CeCochain":
        return CeCochain(self.module, self.degree, int(a) * self.values)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CeCochain)
            and other.degree == self.degree
            and np.array_equal(other.values, self.values)
        )

    def is_zero(self) -> bool:
        return not self.values.any()

    def __repr__(self) -> str:
        return f"CeCochain(degree={self.degree}, values={self.values.tolist()})"


def ce_matrix(module: LieModule, m: int) -> np.ndarray:
    """Matrix of d^m from degree-m to degree-(m+1) cochain coordinates."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    if m + 1 > MAX_DEGREE:
        raise ValueError(f"differentials are assembled up to degree {MAX_DEGREE}")
    return _ce_matrix(module, m)


def _ce_matrix(module: LieModule, m: int) -> np.ndarray:
    L = module.lie
    n, md, p = L.dim, module.dim, L.p
    src = tuple_position(n, m)
    out_tuples = index_tuples(n, m + 1)
    D = np.zeros((len(out_tuples) * md, len(src) * md), dtype=np.int64)
    for row, t in enumerate(out_tuples):
        rs = slice(row * md, (row + 1) * md)
        for i in range(m + 1):
            rest = t[:i] + t[i + 1:]
            col = src[rest]
            sign = 1 if i % 2 == 0 else -1  # (-1)^{i+1} with 1-based i
            D[rs, col * md:(col + 1) * md] += sign * module.rho[t[i]]
        for i in range(m + 1):
            for j in range(i + 1, m + 1):
                rest = t[:i] + t[i + 1:j] + t[j + 1:]
                sign_ij = 1 if (i + j) % 2 == 0 else -1  # (-1)^{(i+1)+(j+1)}
                for k in np.flatnonzero(L.c[t[i], t[j]]):
                    s, srt = sort_with_sign((int(k),) + rest)
                    if s == 0:
                        continue
                    col = src[srt]
                    coeff = sign_ij * s * int(L.c[t[i], t[j], k])
                    D[rs, col * md:(col + 1) * md] += coeff * np.eye(md, dtype=np.int64)
    return D % p


def ce_diff(phi: CeCochain) -> CeCochain:
    D = ce_matrix(phi.module, phi.degree)
    return CeCochain(phi.module, phi.degree + 1, D @ phi.coords())


def ce_cocycles(module: LieModule, m: int) -> np.ndarray:
    """Basis of Z^m as rows of cochain coordinates."""
    return nullspace(ce_matrix(module, m), module.p)


def ce_cohomology_dim(module: LieModule, m: int) -> int:
    p = module.p
    n = module.lie.dim
    cols = comb(n, m) * module.dim
    kernel = cols - rank(ce_matrix(module, m), p) if m + 1 <= n else cols
    image = rank(ce_matrix(module, m - 1), p) if m >= 1 else 0
    return kernel - image


__all__ = [
    "CeCochain",
    "ce_diff",
    "ce_matrix",
    "ce_cocycles",
    "ce_cohomology_dim",
    "index_tuples",
    "tuple_position",
    "sort_with_sign",
    "cochain_space_dim",
    "MAX_DEGREE",
]

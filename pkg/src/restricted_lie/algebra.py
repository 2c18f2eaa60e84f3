"""Lie algebras by structure constants, p-maps and restricted modules.

A p-map is stored only through the images of the basis vectors.  Its value on
an arbitrary vector is obtained by folding over the coordinates with the two
axioms ``(a x)^[p] = a^p x^[p]`` and
``(u + v)^[p] = u^[p] + v^[p] + sum_i s_i(u, v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .gf import (
    FpVector,
    PrimeField,
    all_vectors,
    inv,
    matrix_power,
    nullspace,
    rank,
    row_basis,
    vector_index,
)

DEFAULT_MAX_SWEEP = 10**6


def as_array(v, n: int | None = None) -> np.ndarray:
    if isinstance(v, FpVector):
        arr = np.array(v.entries, dtype=np.int64)
    else:
        arr = np.asarray(v, dtype=np.int64)
    if n is not None and arr.shape[-1] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {arr.shape}")
    return arr


class LieAlgebra:
    """A finite-dimensional Lie algebra over GF(p).

    ``structure[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``.
    Construction rejects data that is not alternating or violates Jacobi,
    naming the first offending basis pair or triple.
    """

    def __init__(
        self,
        field: PrimeField,
        structure,
        basis_names: Sequence[str] | None = None,
        check: bool = True,
    ) -> None:
        c = field.reduce(structure)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError(f"structure constants must have shape (n, n, n), got {c.shape}")
        self.field = field
        self.p = field.p
        self.dim = c.shape[0]
        c.setflags(write=False)
        self.c = c
        if basis_names is None:
            basis_names = [f"e{i}" for i in range(self.dim)]
        if len(basis_names) != self.dim:
            raise ValueError("number of basis names does not match the dimension")
        self.basis_names = tuple(basis_names)
        if check:
            problem = self.structure_problem()
            if problem is not None:
                raise ValueError(problem)

    @classmethod
    def from_brackets(cls, field: PrimeField, dim: int, brackets: dict, basis_names=None, check=True):
        """Build from ``{(i, j): vector}`` with ``i < j``; the rest follows by skew-symmetry."""
        c = np.zeros((dim, dim, dim), dtype=np.int64)
        for (i, j), vec in brackets.items():
            vec = as_array(vec, dim)
            c[i, j] += vec
            c[j, i] -= vec
        return cls(field, c, basis_names, check)

    def structure_problem(self) -> str | None:
        n, p, c = self.dim, self.p, self.c
        for i in range(n):
            if c[i, i].any():
                return f"bracket is not alternating: [e{i}, e{i}] != 0"
        for i in range(n):
            for j in range(i + 1, n):
                if ((c[i, j] + c[j, i]) % p).any():
                    return f"bracket is not skew-symmetric on ({i}, {j})"
        bad = np.argwhere(self.jacobiator().any(axis=-1))
        if len(bad):
            i, j, k = bad[0]
            return f"Jacobi identity fails on basis triple ({i}, {j}, {k})"
        return None

    def jacobiator(self) -> np.ndarray:
        """``J[i, j, k] = [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]``."""
        t = np.einsum("jkl,ilm->ijkm", self.c, self.c)
        return (t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)) % self.p

    def bracket(self, x, y) -> np.ndarray:
        x, y = as_array(x, self.dim), as_array(y, self.dim)
        return np.einsum("i,j,ijk->k", x, y, self.c) % self.p

    def ad(self, x) -> np.ndarray:
        """Matrix of ``v -> [x, v]`` (columns are images of basis vectors)."""
        x = as_array(x, self.dim)
        return np.einsum("i,ijk->kj", x, self.c) % self.p

    def right(self, y) -> np.ndarray:
        """Matrix of ``v -> [v, y]``."""
        return (-self.ad(y)) % self.p

    @cached_property
    def ad_basis(self) -> np.ndarray:
        return np.stack([self.ad(e) for e in np.eye(self.dim, dtype=np.int64)]) if self.dim else np.zeros((0, 0, 0), dtype=np.int64)

    def is_abelian(self) -> bool:
        return not self.c.any()

    def basis(self) -> np.ndarray:
        return np.eye(self.dim, dtype=np.int64)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LieAlgebra) and other.field == self.field and np.array_equal(other.c, self.c)

    def __repr__(self) -> str:
        return f"LieAlgebra(GF({self.p}), dim={self.dim}, basis={list(self.basis_names)})"


def bracket(L: LieAlgebra, x, y) -> np.ndarray:
    return L.bracket(x, y)


@dataclass(frozen=True)
class ZPolynomialVector:
    """A polynomial in a formal variable Z with vector coefficients."""

    coefficients: np.ndarray  # shape (degree + 1, n)

    def coefficient(self, k: int) -> np.ndarray:
        if k < len(self.coefficients):
            return self.coefficients[k]
        return np.zeros(self.coefficients.shape[1], dtype=np.int64)


def ad_power_in_z(L: LieAlgebra, x, y, power: int | None = None) -> ZPolynomialVector:
    """Expand ``ad_{Z x + y}^power (x)`` as a polynomial in ``Z``."""
    p = L.p
    if power is None:
        power = p - 1
    x, y = as_array(x, L.dim), as_array(y, L.dim)
    adx, ady = L.ad(x), L.ad(y)
    poly = x[None, :] % p
    for _ in range(power):
        nxt = np.zeros((len(poly) + 1, L.dim), dtype=np.int64)
        nxt[:-1] += poly @ ady.T
        nxt[1:] += poly @ adx.T
        poly = nxt % p
    return ZPolynomialVector(poly)


def s_i(L: LieAlgebra, x, y) -> list[np.ndarray]:
    """The correction terms ``[s_1(x, y), ..., s_{p-1}(x, y)]``."""
    p = L.p
    poly = ad_power_in_z(L, x, y)
    return [(inv(i, p) * poly.coefficient(i - 1)) % p for i in range(1, p)]


def s_sum(L: LieAlgebra, x, y) -> np.ndarray:
    terms = s_i(L, x, y)
    return np.sum(terms, axis=0) % L.p if terms else np.zeros(L.dim, dtype=np.int64)


@dataclass(frozen=True)
class PMap:
    """Basis images ``images[i] = e_i^[p]`` of a p-map on ``parent``."""

    parent: LieAlgebra
    images: np.ndarray


@dataclass
class JacobsonEntry:
    index: int
    ok: bool


@dataclass
class JacobsonReport:
    """Per-basis-vector outcome of the check ``ad(e_j)^p == ad(e_j^[p])``."""

    entries: list[JacobsonEntry]

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    def failures(self) -> list[int]:
        return [e.index for e in self.entries if not e.ok]

    def __bool__(self) -> bool:
        return self.passed


def verify_restricted(L: LieAlgebra, images) -> JacobsonReport:
    """Jacobson's criterion on the basis: a p-map with these images exists iff all entries pass."""
    images = L.field.reduce(images).reshape(L.dim, L.dim)
    entries = []
    for j in range(L.dim):
        lhs = matrix_power(L.ad_basis[j], L.p, L.p)
        rhs = L.ad(images[j])
        entries.append(JacobsonEntry(j, bool(np.array_equal(lhs, rhs))))
    return JacobsonReport(entries)


class RestrictedLieAlgebra:
    """A Lie algebra together with a p-map given on the basis."""

    def __init__(self, lie: LieAlgebra, images, check: bool = True) -> None:
        images = lie.field.reduce(images).reshape(lie.dim, lie.dim)
        images.setflags(write=False)
        self.lie = lie
        self.pmap = PMap(lie, images)
        if check:
            report = verify_restricted(lie, images)
            if not report.passed:
                raise ValueError(
                    "p-map images violate ad(e_j)^p = ad(e_j^[p]) for basis indices "
                    f"{report.failures()}"
                )

    @property
    def field(self) -> PrimeField:
        return self.lie.field

    @property
    def p(self) -> int:
        return self.lie.p

    @property
    def dim(self) -> int:
        return self.lie.dim

    @property
    def images(self) -> np.ndarray:
        return self.pmap.images

    @property
    def basis_names(self) -> tuple[str, ...]:
        return self.lie.basis_names

    def bracket(self, x, y) -> np.ndarray:
        return self.lie.bracket(x, y)

    def power(self, v) -> np.ndarray:
        return pmap_eval(self, v)

    @cached_property
    def pmap_table(self) -> np.ndarray:
        """p-map values on every vector, indexed as in :func:`gf.all_vectors`.

        Built incrementally: a vector is its prefix (last nonzero coordinate
        removed) plus one scaled basis vector, so each entry costs one fold step.
        """
        p, n = self.p, self.dim
        vecs = all_vectors(p, n)
        table = np.zeros_like(vecs)
        for idx in range(1, len(vecs)):
            v = vecs[idx]
            last = int(np.flatnonzero(v)[-1])
            u = v.copy()
            u[last] = 0
            a = int(v[last])
            step = np.zeros(n, dtype=np.int64)
            step[last] = a
            table[idx] = (
                table[vector_index(u, p)]
                + pow(a, p, p) * self.images[last]
                + s_sum(self.lie, u, step)
            ) % p
        table.setflags(write=False)
        return table

    def __repr__(self) -> str:
        return f"RestrictedLieAlgebra(GF({self.p}), dim={self.dim}, images={self.images.tolist()})"


def pmap_eval(R: RestrictedLieAlgebra, v, order: Sequence[int] | None = None) -> np.ndarray:
    """Evaluate the p-map on ``v`` by folding over its basis components."""
    p, n = R.p, R.dim
    v = as_array(v, n) % p
    order = range(n) if order is None else order
    u = np.zeros(n, dtype=np.int64)
    acc = np.zeros(n, dtype=np.int64)
    for i in order:
        a = int(v[i])
        if a == 0:
            continue
        step = np.zeros(n, dtype=np.int64)
        step[i] = a
        acc = (acc + pow(a, p, p) * R.images[i] + s_sum(R.lie, u, step)) % p
        u = (u + step) % p
    return acc


class LieModule:
    """A representation of a Lie algebra: ``rho[i]`` is the matrix of ``e_i``."""

    def __init__(self, lie: LieAlgebra, rho, check: bool = True) -> None:
        rho = lie.field.reduce(rho)
        if rho.ndim != 3 or rho.shape[0] != lie.dim or rho.shape[1] != rho.shape[2]:
            raise ValueError(f"representation matrices must have shape (n, m, m), got {rho.shape}")
        rho.setflags(write=False)
        self.lie = lie
        self.rho = rho
        self.dim = rho.shape[1]
        if check:
            problem = self.module_problem()
            if problem is not None:
                raise ValueError(problem)

    @property
    def field(self) -> PrimeField:
        return self.lie.field

    @property
    def p(self) -> int:
        return self.lie.p

    def module_problem(self) -> str | None:
        p, n = self.p, self.lie.dim
        for i in range(n):
            for j in range(i + 1, n):
                lhs = self.rep(self.lie.c[i, j])
                rhs = (self.rho[i] @ self.rho[j] - self.rho[j] @ self.rho[i]) % p
                if not np.array_equal(lhs, rhs):
                    return f"rho([e{i}, e{j}]) != [rho(e{i}), rho(e{j})]"
        return None

    def rep(self, x) -> np.ndarray:
        x = as_array(x, self.lie.dim)
        return np.einsum("i,ijk->jk", x, self.rho) % self.p

    def act(self, x, v) -> np.ndarray:
        return (self.rep(x) @ as_array(v, self.dim)) % self.p

    def is_trivial(self) -> bool:
        return not self.rho.any()


class RestrictedModule(LieModule):
    """A module on which ``x^[p]`` acts as the p-th power of ``x``."""

    def __init__(self, algebra: RestrictedLieAlgebra, rho, check: bool = True) -> None:
        self.algebra = algebra
        super().__init__(algebra.lie, rho, check)

    def module_problem(self) -> str | None:
        problem = super().module_problem()
        if problem is not None:
            return problem
        p = self.p
        for i in range(self.lie.dim):
            lhs = self.rep(self.algebra.images[i])
            rhs = matrix_power(self.rho[i], p, p)
            if not np.array_equal(lhs, rhs):
                return f"rho(e{i}^[p]) != rho(e{i})^p"
        return None


def adjoint_module(A) -> LieModule:
    """The adjoint module of a Lie algebra or restricted Lie algebra."""
    if isinstance(A, RestrictedLieAlgebra):
        return RestrictedModule(A, A.lie.ad_basis)
    return LieModule(A, A.ad_basis)


def trivial_module(A, dim: int = 1) -> LieModule:
    lie = A.lie if isinstance(A, RestrictedLieAlgebra) else A
    rho = np.zeros((lie.dim, dim, dim), dtype=np.int64)
    if isinstance(A, RestrictedLieAlgebra):
        return RestrictedModule(A, rho)
    return LieModule(A, rho)


def center(L: LieAlgebra) -> list[np.ndarray]:
    """Basis of ``{v : [v, e_i] = 0 for all i}``."""
    n = L.dim
    if n == 0:
        return []
    m = np.transpose(L.c, (1, 2, 0)).reshape(n * n, n)
    return list(nullspace(m, L.p))


def _derivation_residual(L: LieAlgebra, D: np.ndarray) -> np.ndarray:
    c, p = L.c, L.p
    lhs = np.einsum("ijk,mk->ijm", c, D)
    r1 = np.einsum("ki,kjm->ijm", D, c)
    r2 = np.einsum("kj,ikm->ijm", D, c)
    return (lhs - r1 - r2) % p


def _linear_system(n_unknowns: int, shape: tuple[int, ...], residual) -> np.ndarray:
    cols = []
    for t in range(n_unknowns):
        unit = np.zeros(n_unknowns, dtype=np.int64)
        unit[t] = 1
        cols.append(residual(unit).reshape(-1))
    return np.stack(cols, axis=1) if cols else np.zeros((0, 0), dtype=np.int64)


def derivations(L: LieAlgebra) -> list[np.ndarray]:
    """Basis of Der(L); ``D[:, j]`` is the image of ``e_j``."""
    n = L.dim
    system = _linear_system(n * n, (n, n), lambda u: _derivation_residual(L, u.reshape(n, n)))
    return [row.reshape(n, n) for row in nullspace(system, L.p)]


def inner_derivations(L: LieAlgebra) -> list[np.ndarray]:
    rows = row_basis(L.ad_basis.reshape(L.dim, -1), L.p)
    return [r.reshape(L.dim, L.dim) for r in rows]


def _ad_powers(L: LieAlgebra, vecs: np.ndarray, k: int) -> np.ndarray:
    """``ad_v^k`` for every row ``v`` of ``vecs``."""
    p = L.p
    ads = np.einsum("Ni,ijk->Nkj", vecs, L.c) % p
    out = np.broadcast_to(np.eye(L.dim, dtype=np.int64), ads.shape).copy()
    for _ in range(k):
        out = np.einsum("Nab,Nbc->Nac", ads, out) % p
    return out


def restricted_derivations(
    R: RestrictedLieAlgebra,
    max_sweep: int = DEFAULT_MAX_SWEEP,
    samples: int = 200,
    seed: int = 0,
) -> list[np.ndarray]:
    """Derivations with ``D(v^[p]) = ad_v^{p-1}(D v)`` for every vector ``v``.

    The condition is linear in ``D`` for each fixed ``v``, so the answer is the
    common kernel of the conditions over all ``v``.  When ``p**n`` exceeds
    ``max_sweep`` the basis vectors plus a seeded random sample are used.
    """
    p, n = R.p, R.dim
    ders = derivations(R.lie)
    if not ders:
        return []
    if p**n <= max_sweep:
        vecs = all_vectors(p, n)
        powers = R.pmap_table
    else:
        rng = np.random.default_rng(seed)
        vecs = np.vstack([np.eye(n, dtype=np.int64), rng.integers(0, p, size=(samples, n))])
        powers = np.stack([pmap_eval(R, v) for v in vecs])
    adp = _ad_powers(R.lie, vecs, p - 1)
    cols = []
    for D in ders:
        lhs = powers @ D.T
        rhs = np.einsum("Nab,Nb->Na", adp, vecs @ D.T)
        cols.append(((lhs - rhs) % p).reshape(-1))
    system = np.stack(cols, axis=1)
    out = []
    for coeffs in nullspace(system, p):
        out.append(sum(int(a) * D for a, D in zip(coeffs, ders)) % p)
    return out


# -- restricted morphisms and isomorphism search ---------------------------


@dataclass
class IsomorphismSearch:
    """Outcome of :func:`is_isomorphic_restricted`.

    ``status`` is ``"found"``, ``"none"`` or ``"infeasible"``; ``matrix`` holds
    the isomorphism (columns are images of the basis of the first algebra).
    """

    status: str
    matrix: np.ndarray | None = None
    candidates_examined: int = 0

    def __bool__(self) -> bool:
        return self.status == "found"


def morphism_problem(
    R1: RestrictedLieAlgebra,
    R2: RestrictedLieAlgebra,
    T,
    max_sweep: int = DEFAULT_MAX_SWEEP,
) -> str | None:
    """Why ``T`` fails to be a restricted morphism, or None when it is one.

    The bracket is checked on basis pairs; the p-map on every vector (it is not
    linear) when ``p**n <= max_sweep``, otherwise on the basis.
    """
    p, n = R1.p, R1.dim
    T = np.asarray(T, dtype=np.int64) % p
    for i in range(n):
        for j in range(i + 1, n):
            lhs = T @ R1.lie.c[i, j] % p
            rhs = R2.bracket(T[:, i], T[:, j])
            if not np.array_equal(lhs, rhs):
                return f"bracket not preserved on basis pair ({i}, {j})"
    if p**n <= max_sweep and p ** R2.dim <= max_sweep:
        vecs = all_vectors(p, n)
        lhs = R1.pmap_table @ T.T % p
        rhs = R2.pmap_table[vector_index(vecs @ T.T % p, p)]
        bad = np.flatnonzero((lhs != rhs).any(axis=1))
        if len(bad):
            return f"p-map not preserved at vector {vecs[bad[0]].tolist()}"
    else:
        for i in range(n):
            if not np.array_equal(T @ R1.images[i] % p, pmap_eval(R2, T[:, i])):
                return f"p-map not preserved at basis vector {i}"
    return None


def _is_heisenberg_shaped(L: LieAlgebra) -> bool:
    if L.dim != 3:
        return False
    expected = np.zeros((3, 3, 3), dtype=np.int64)
    expected[0, 1, 2] = 1
    expected[1, 0, 2] = L.p - 1
    return np.array_equal(L.c, expected)


def _first_valid(R1, R2, cands: np.ndarray, max_sweep: int) -> np.ndarray | None:
    """Filter candidate matrices (B, n, n) by the p-map on the basis, then confirm in order."""
    p, n = R1.p, R1.dim
    ok = np.ones(len(cands), dtype=bool)
    table2 = R2.pmap_table
    for i in range(n):
        col = cands[:, :, i]
        lhs = np.einsum("bkl,l->bk", cands, R1.images[i]) % p
        rhs = table2[vector_index(col, p)]
        ok &= (lhs == rhs).all(axis=1)
    for b in np.flatnonzero(ok):
        T = cands[b]
        if rank(T, p) == n and morphism_problem(R1, R2, T, max_sweep) is None:
            return T
    return None


def is_isomorphic_restricted(
    R1: RestrictedLieAlgebra,
    R2: RestrictedLieAlgebra,
    max_candidates: int = 10**7,
    max_sweep: int = DEFAULT_MAX_SWEEP,
) -> IsomorphismSearch:
    """Search for a restricted isomorphism ``R1 -> R2``.

    Heisenberg-shaped pairs use the six-parameter family
    ``x -> ax+by+cz, y -> dx+ey+fz, z -> (ae-bd) z``; other pairs scan all
    n x n matrices in lexicographic order when ``p**(n*n) <= max_candidates``.
    The first match in candidate order is returned.
    """
    if R1.field != R2.field:
        raise ValueError("algebras are defined over different fields")
    if R1.dim != R2.dim:
        raise ValueError("algebras have different dimensions")
    p, n = R1.p, R1.dim
    if p**n > max_sweep:
        return IsomorphismSearch("infeasible")
    if _is_heisenberg_shaped(R1.lie) and _is_heisenberg_shaped(R2.lie):
        params = all_vectors(p, 6)
        a, b, c, d, e, f = params.T
        u = (a * e - b * d) % p
        keep = u != 0
        params, u = params[keep], u[keep]
        cands = np.zeros((len(params), 3, 3), dtype=np.int64)
        cands[:, :, 0] = params[:, 0:3]
        cands[:, :, 1] = params[:, 3:6]
        cands[:, 2, 2] = u
        T = _first_valid(R1, R2, cands, max_sweep)
        return IsomorphismSearch("found" if T is not None else "none", T, len(cands))
    total = p ** (n * n)
    if total > max_candidates:
        return IsomorphismSearch("infeasible")
    chunk = 200_000
    examined = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = np.zeros((len(idx), n * n), dtype=np.int64)
        rem = idx.copy()
        for pos in range(n * n - 1, -1, -1):
            digits[:, pos] = rem % p
            rem //= p
        cands = digits.reshape(-1, n, n)
        lhs = np.einsum("ijk,bak->bija", R1.lie.c, cands) % p
        rhs = np.einsum("bai,bcj,ack->bijk", cands, cands, R2.lie.c) % p
        cands = cands[(lhs == rhs).all(axis=(1, 2, 3))]
        examined += len(idx)
        if len(cands):
            T = _first_valid(R1, R2, cands, max_sweep)
            if T is not None:
                return IsomorphismSearch("found", T, examined)
    return IsomorphismSearch("none", None, examined)


__all__ = [
    "LieAlgebra",
    "PMap",
    "RestrictedLieAlgebra",
    "LieModule",
    "RestrictedModule",
    "ZPolynomialVector",
    "JacobsonReport",
    "IsomorphismSearch",
    "bracket",
    "ad_power_in_z",
    "s_i",
    "s_sum",
    "pmap_eval",
    "verify_restricted",
    "adjoint_module",
    "trivial_module",
    "center",
    "derivations",
    "inner_derivations",
    "restricted_derivations",
    "morphism_problem",
    "is_isomorphic_restricted",
    "as_array",
    "DEFAULT_MAX_SWEEP",
]

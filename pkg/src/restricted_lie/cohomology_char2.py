"""Restricted cohomology in characteristic 2.

An n-cochain (n >= 2) is a pair (phi, omega): phi is an alternating n-form and
omega takes n - 1 arguments.  omega is quadratic in its first slot,

    omega(x + y, z...) = omega(x, z...) + omega(y, z...) + phi(x, y, z...),

and linear in the others.  It is stored on (basis index, tuple of basis
indices) with no symmetry assumed in the trailing slots, and evaluated at
arbitrary vectors through the rule above.

The differential is d^n(phi, omega) = (d_CE phi, delta^n omega) with

    delta^n omega(x, z_2..z_n) = x . phi(x, z_2..z_n)
        + sum_i z_i . omega(x, .. z^_i ..)
        + phi(x^[2], z_2..z_n)
        + sum_i phi([x, z_i], x, .. z^_i ..)
        + sum_{2 <= i < j} omega(x, [z_i, z_j], .. z^_i .. z^_j ..)

and d^1 psi = (d_CE psi, x -> psi(x^[2]) + x . psi(x)).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product

import numpy as np

from .algebra import (
    LieAlgebra,
    LieModule,
    RestrictedLieAlgebra,
    as_array,
    verify_restricted,
)
from .cohomology_ce import CeCochain, ce_matrix, index_tuples, sort_with_sign
from .gf import all_vectors, in_span, nullspace, row_basis

MAX_DEGREE = 5
DEFAULT_ORACLE_BUDGET = 4096


def _require_char2(obj) -> None:
    if obj.p != 2:
        raise ValueError("characteristic 2 is required")


@lru_cache(maxsize=None)
def _perm_signs(m: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    return tuple((perm, sort_with_sign(perm)[0]) for perm in permutations(range(m)))


def phi_matrix(module: LieModule, degree: int, *vectors) -> np.ndarray:
    """``E`` with ``phi(v_1, .., v_m) = E @ phi_coords`` for an alternating m-form."""
    n, md, p = module.lie.dim, module.dim, module.p
    tuples = index_tuples(n, degree)
    if not tuples:
        return np.zeros((md, 0), dtype=np.int64)
    V = np.array([as_array(v, n) for v in vectors], dtype=np.int64).reshape(degree, n)
    coef = np.zeros(len(tuples), dtype=np.int64)
    for pos, t in enumerate(tuples):
        sub = V[:, list(t)]
        total = 0
        for perm, sign in _perm_signs(degree):
            term = sign
            for a in range(degree):
                term *= int(sub[a, perm[a]])
                if term == 0:
                    break
            total += term
        coef[pos] = total % p
    return np.kron(coef[None, :], np.eye(md, dtype=np.int64)) % p


class Layout:
    """Coordinates of C^n_{*2}: phi on increasing tuples, then omega on (i, J)."""

    def __init__(self, module: LieModule, degree: int) -> None:
        n, md = module.lie.dim, module.dim
        self.module = module
        self.degree = degree
        self.n = n
        self.md = md
        if degree < 2:
            self.n_phi = len(index_tuples(n, degree)) * md
            self.n_omega = 0
            self.tail = 0
        else:
            self.n_phi = len(index_tuples(n, degree)) * md
            self.tail = n ** (degree - 2)
            self.n_omega = n * self.tail * md
        self.size = self.n_phi + self.n_omega

    def omega_col(self, i: int, J_flat: int) -> int:
        return self.n_phi + (i * self.tail + J_flat) * self.md


def _tail_weights(n: int, zs) -> np.ndarray:
    """Coefficients of ``z_2 (x) .. (x) z_k`` on basis tuples in lexicographic order."""
    w = np.ones(1, dtype=np.int64)
    for z in zs:
        w = np.outer(w, as_array(z, n)).reshape(-1)
    return w


def omega_matrix(module: LieModule, degree: int, x, *zs) -> np.ndarray:
    """Matrix over C^degree_{*2} coordinates of ``omega(x, z_2, ..)``."""
    lay = Layout(module, degree)
    if degree < 2:
        raise ValueError("omega exists from degree 2 on")
    if len(zs) != degree - 2:
        raise ValueError(f"omega of degree {degree} takes {degree - 1} arguments")
    n, md, p = lay.n, lay.md, module.p
    x = as_array(x, n) % p
    out = np.zeros((md, lay.size), dtype=np.int64)
    w = _tail_weights(n, zs) % p
    eye = np.eye(md, dtype=np.int64)
    nz = np.flatnonzero(x)
    for i in nz:
        a2 = int(x[i]) ** 2 % p
        if a2 == 0:
            continue
        for jf in np.flatnonzero(w):
            col = lay.omega_col(int(i), int(jf))
            out[:, col:col + md] += a2 * int(w[jf]) * eye
    basis = np.eye(n, dtype=np.int64)
    for a_pos, i in enumerate(nz):
        for j in nz[a_pos + 1:]:
            coef = int(x[i]) * int(x[j]) % p
            out[:, : lay.n_phi] += coef * phi_matrix(module, degree, basis[i], basis[j], *zs)
    return out % p


class Char2Cochain:
    """A cochain of the characteristic-2 complex.

    Degrees 0 and 1 are ordinary CE cochains; from degree 2 on the cochain is a
    pair (phi, omega) with ``omega_values`` of shape ``(n, n**(degree-2), module_dim)``.
    """

    def __init__(self, module: LieModule, degree: int, phi: CeCochain, omega_values=None) -> None:
        _require_char2(module)
        if degree > MAX_DEGREE:
            raise ValueError(f"degree above {MAX_DEGREE} is not supported")
        self.module = module
        self.degree = degree
        self.phi = phi
        lay = Layout(module, degree)
        if degree >= 2:
            if omega_values is None:
                omega_values = np.zeros((lay.n, lay.tail, lay.md), dtype=np.int64)
            omega_values = module.field.reduce(omega_values).reshape(lay.n, lay.tail, lay.md)
        self.omega_values = omega_values

    @classmethod
    def from_coords(cls, module: LieModule, degree: int, coords) -> "Char2Cochain":
        lay = Layout(module, degree)
        coords = np.asarray(coords, dtype=np.int64).reshape(-1)
        phi = CeCochain(module, degree, coords[: lay.n_phi])
        om = coords[lay.n_phi:] if degree >= 2 else None
        return cls(module, degree, phi, om)

    @classmethod
    def zero(cls, module: LieModule, degree: int) -> "Char2Cochain":
        return cls.from_coords(module, degree, np.zeros(Layout(module, degree).size, dtype=np.int64))

    def coords(self) -> np.ndarray:
        parts = [self.phi.coords()]
        if self.degree >= 2:
            parts.append(self.omega_values.reshape(-1))
        return np.concatenate(parts)

    def omega(self, x, *zs) -> np.ndarray:
        if self.degree < 2:
            raise ValueError("omega exists from degree 2 on")
        return omega_matrix(self.module, self.degree, x, *zs) @ self.coords() % 2

    def is_zero(self) -> bool:
        return not self.coords().any()

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Char2Cochain)
            and other.degree == self.degree
            and np.array_equal(other.coords(), self.coords())
        )

    def __repr__(self) -> str:
        return f"Char2Cochain(degree={self.degree}, nonzero={int(np.count_nonzero(self.coords()))})"


# -- differentials ---------------------------------------------------------


def delta_matrix_at(module: LieModule, degree: int, x, zs) -> np.ndarray:
    """Matrix over C^degree coordinates of ``delta^degree omega(x, z_2..z_degree)``."""
    R = module.algebra
    L = module.lie
    n = L.dim
    lay = Layout(module, degree)
    x = as_array(x, n) % 2
    zs = [as_array(z, n) % 2 for z in zs]
    if len(zs) != degree - 1:
        raise ValueError(f"delta^{degree} omega takes {degree} arguments")
    out = np.zeros((lay.md, lay.size), dtype=np.int64)
    phi = lambda *vs: phi_matrix(module, degree, *vs)
    om = lambda *vs: omega_matrix(module, degree, *vs)
    out[:, : lay.n_phi] += module.rep(x) @ phi(x, *zs)
    for i, zi in enumerate(zs):
        rest = zs[:i] + zs[i + 1:]
        out += module.rep(zi) @ om(x, *rest)
        out[:, : lay.n_phi] += phi(L.bracket(x, zi), x, *rest)
    out[:, : lay.n_phi] += phi(R.power(x), *zs)
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            rest = [z for k, z in enumerate(zs) if k not in (i, j)]
            out += om(x, L.bracket(zs[i], zs[j]), *rest)
    return out % 2


def d1_matrix(module: LieModule) -> np.ndarray:
    """Matrix of d^1_{*2} from 1-cochain coordinates to C^2_{*2} coordinates."""
    _require_char2(module)
    R = module.algebra
    n, md = module.lie.dim, module.dim
    eye = np.eye(n, dtype=np.int64)
    rows = [ce_matrix(module, 1)]
    for i in range(n):
        at = lambda v: np.kron(as_array(v, n)[None, :], np.eye(md, dtype=np.int64))
        rows.append(at(R.images[i]) + module.rep(eye[i]) @ at(eye[i]))
    return np.vstack(rows) % 2


def d_matrix(module: LieModule, degree: int) -> np.ndarray:
    """Matrix of d^degree_{*2}."""
    _require_char2(module)
    if degree == 0:
        return ce_matrix(module, 0) % 2
    if degree == 1:
        return d1_matrix(module)
    if degree > MAX_DEGREE - 1:
        raise ValueError(f"differentials are provided up to degree {MAX_DEGREE - 1}")
    n = module.lie.dim
    lay = Layout(module, degree)
    ce = ce_matrix(module, degree)
    top = np.hstack([ce, np.zeros((ce.shape[0], lay.n_omega), dtype=np.int64)])
    eye = np.eye(n, dtype=np.int64)
    rows = [top]
    for i in range(n):
        for J in product(range(n), repeat=degree - 1):
            rows.append(delta_matrix_at(module, degree, eye[i], [eye[j] for j in J]))
    return np.vstack(rows) % 2


def d1_star2(psi: CeCochain) -> Char2Cochain:
    module = psi.module
    return Char2Cochain.from_coords(module, 2, d1_matrix(module) @ psi.coords() % 2)


def d_star2(c: Char2Cochain) -> Char2Cochain:
    module = c.module
    return Char2Cochain.from_coords(module, c.degree + 1, d_matrix(module, c.degree) @ c.coords() % 2)


def delta_n(c: Char2Cochain) -> np.ndarray:
    """The omega part of d^n_{*2} c, shape ``(n, n**(degree-1), module_dim)``."""
    if c.degree < 2:
        raise ValueError("delta^n is defined for n >= 2")
    return d_star2(c).omega_values


# -- cohomology ------------------------------------------------------------


class OracleMismatch(AssertionError):
    """A cocycle found on basis tuples failed at some vector arguments."""


@dataclass
class Char2Cohomology:
    degree: int
    dim: int
    cocycles: np.ndarray
    coboundaries: np.ndarray
    module: LieModule
    oracle_checked: bool = False

    def cocycle_list(self) -> list[Char2Cochain]:
        return [Char2Cochain.from_coords(self.module, self.degree, r) for r in self.cocycles]

    def is_cocycle(self, c: Char2Cochain) -> bool:
        return in_span(self.cocycles, c.coords(), 2)

    def is_coboundary(self, c: Char2Cochain) -> bool:
        return in_span(self.coboundaries, c.coords(), 2)


def _oracle(module: LieModule, degree: int, rows: np.ndarray) -> None:
    """Evaluate the differential of each row at every choice of vector arguments."""
    n = module.lie.dim
    vecs = all_vectors(2, n)
    if degree == 1:
        R = module.algebra
        md = module.dim
        for r, coords in enumerate(rows):
            psi = coords.reshape(n, md)
            for x in vecs:
                val = (R.power(x) @ psi + module.rep(x) @ (x @ psi)) % 2
                if val.any():
                    raise OracleMismatch(f"cocycle {r} fails the restricted condition at x={x.tolist()}")
        return
    for args in product(range(len(vecs)), repeat=degree):
        x = vecs[args[0]]
        zs = [vecs[a] for a in args[1:]]
        values = delta_matrix_at(module, degree, x, zs) @ rows.T % 2
        if values.any():
            bad = int(np.flatnonzero(values.any(axis=0))[0])
            raise OracleMismatch(
                f"cocycle {bad} has nonzero delta at x={x.tolist()}, z={[z.tolist() for z in zs]}"
            )


def h_n_star2(R: RestrictedLieAlgebra, M: LieModule, n: int, oracle_budget: int = DEFAULT_ORACLE_BUDGET) -> Char2Cohomology:
    """H^n_{*2}(R, M) for n <= 4, with cocycle and coboundary bases.

    When ``2**(n*dim) <= oracle_budget`` every returned cocycle is re-checked at
    all vector arguments (the CE part is multilinear, so basis tuples decide it).
    """
    _require_char2(M)
    if not 0 <= n <= 4:
        raise ValueError("cohomology is provided for 0 <= n <= 4")
    Dn = d_matrix(M, n)
    Z = nullspace(Dn, 2)
    B = row_basis(d_matrix(M, n - 1).T, 2) if n >= 1 else np.zeros((0, Dn.shape[1]), dtype=np.int64)
    for b in B:
        if not in_span(Z, b, 2):
            raise AssertionError("a coboundary failed the cocycle conditions")
    checked = False
    dim = R.dim
    if n >= 1 and 2 ** (n * dim) <= oracle_budget and len(Z):
        _oracle(M, n, Z)
        checked = True
    return Char2Cohomology(n, len(Z) - len(B), Z, B, M, checked)


# -- power series ----------------------------------------------------------


class Char2PowerSeriesElement:
    """A truncated series ``sum_{i <= N} t^i x_i`` with coefficients in L."""

    def __init__(self, coefficients, order: int | None = None) -> None:
        c = np.asarray(coefficients, dtype=np.int64) % 2
        if c.ndim != 2:
            raise ValueError("coefficients must be a (terms, dim) array")
        if order is not None:
            if c.shape[0] > order + 1:
                c = c[: order + 1]
            elif c.shape[0] < order + 1:
                c = np.vstack([c, np.zeros((order + 1 - c.shape[0], c.shape[1]), dtype=np.int64)])
        self.coefficients = c

    @property
    def order(self) -> int:
        return self.coefficients.shape[0] - 1

    def __add__(self, other: "Char2PowerSeriesElement") -> "Char2PowerSeriesElement":
        self._same(other)
        return Char2PowerSeriesElement(self.coefficients + other.coefficients)

    def shift(self, k: int) -> "Char2PowerSeriesElement":
        """Multiply by ``t**k`` and truncate."""
        c = np.zeros_like(self.coefficients)
        if k <= self.order:
            c[k:] = self.coefficients[: self.order + 1 - k]
        return Char2PowerSeriesElement(c)

    def _same(self, other: "Char2PowerSeriesElement") -> None:
        if self.coefficients.shape != other.coefficients.shape:
            raise ValueError("series must have the same truncation order and dimension")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Char2PowerSeriesElement) and np.array_equal(
            self.coefficients, other.coefficients
        )

    def __repr__(self) -> str:
        return f"Char2PowerSeriesElement(order={self.order}, coefficients={self.coefficients.tolist()})"


def series_bracket(L: LieAlgebra, a: Char2PowerSeriesElement, b: Char2PowerSeriesElement) -> Char2PowerSeriesElement:
    a._same(b)
    N = a.order
    out = np.zeros_like(a.coefficients)
    for i in range(N + 1):
        for j in range(N + 1 - i):
            out[i + j] += L.bracket(a.coefficients[i], b.coefficients[j])
    return Char2PowerSeriesElement(out)


def two_map_extend(R: RestrictedLieAlgebra, s: Char2PowerSeriesElement) -> Char2PowerSeriesElement:
    """``sum_i t^{2i} x_i^[2] + sum_{i<j} t^{i+j} [x_i, x_j]``, truncated at the order of ``s``."""
    _require_char2(R)
    N = s.order
    x = s.coefficients
    out = np.zeros_like(x)
    for i in range(N // 2 + 1):
        out[2 * i] += R.power(x[i])
    for i in range(N + 1):
        for j in range(i + 1, N + 1 - i):
            out[i + j] += R.bracket(x[i], x[j])
    return Char2PowerSeriesElement(out)


# -- central extensions ----------------------------------------------------


@dataclass
class CentralExtensionReport:
    lie: LieAlgebra
    images: np.ndarray
    jacobi_ok: bool
    jacobson: object

    @property
    def passed(self) -> bool:
        return self.jacobi_ok and self.jacobson.passed

    def algebra(self) -> RestrictedLieAlgebra:
        if not self.passed:
            raise ValueError("the extension is not a restricted Lie algebra")
        return RestrictedLieAlgebra(self.lie, self.images)


def central_extension(R: RestrictedLieAlgebra, phi, omega_basis) -> CentralExtensionReport:
    """Candidate restricted algebra on L + F c from a scalar pair (phi, omega).

    ``phi`` is an n x n alternating matrix (or a degree-2 CeCochain with values in
    a 1-dimensional module) and ``omega_basis`` the values omega(e_i).  The new
    basis element c is last; ``[x + uc, y + vc] = [x, y] + phi(x, y) c`` and
    ``(x + uc)^[2] = x^[2] + omega(x) c``.
    """
    _require_char2(R)
    n = R.dim
    if isinstance(phi, CeCochain):
        phi = phi.tensor().reshape(n, n)
    phi = np.asarray(phi, dtype=np.int64).reshape(n, n) % 2
    om = np.asarray(omega_basis, dtype=np.int64).reshape(n) % 2
    c = np.zeros((n + 1, n + 1, n + 1), dtype=np.int64)
    c[:n, :n, :n] = R.lie.c
    c[:n, :n, n] = phi
    names = list(R.basis_names) + ["c"]
    lie = LieAlgebra(R.field, c, names, check=False)
    jacobi_ok = lie.structure_problem() is None
    images = np.zeros((n + 1, n + 1), dtype=np.int64)
    images[:n, :n] = R.images
    images[:n, n] = om
    return CentralExtensionReport(lie, images, jacobi_ok, verify_restricted(lie, images))


__all__ = [
    "Char2Cochain",
    "Char2Cohomology",
    "Char2PowerSeriesElement",
    "CentralExtensionReport",
    "OracleMismatch",
    "Layout",
    "phi_matrix",
    "omega_matrix",
    "delta_matrix_at",
    "d_matrix",
    "d1_matrix",
    "d1_star2",
    "d_star2",
    "delta_n",
    "h_n_star2",
    "series_bracket",
    "two_map_extend",
    "central_extension",
]

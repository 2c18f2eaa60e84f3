"""Restricted cohomology for p > 2 in degrees 0-2, and the abelian complex.

A restricted 2-cochain is a pair (phi, omega): phi is an alternating bilinear
map and omega is given by its values on the basis.  Values of omega on other
vectors come from the (*)-extension, folding over coordinates with

    omega(x + y) = omega(x) + omega(y)
        + sum over (x_3..x_p) in {x, y}^{p-2} of 1/#x *
          sum_{k=0}^{p-2} (-1)^k x_p ... x_{p-k+1} . phi([..[x_1, x_2], ..], x_{p-k})

with x_1 = x, x_2 = y.  The string of module actions is read as an operator
product, so x_{p-k+1} acts first and x_p last.

These formulas go with the CE differential of the opposite sign to the one in
:mod:`cohomology_ce`, so d^1_* pairs ``-d^1_CE psi`` with ``ind1(psi)``.  With
this choice the infinitesimal part (m_1, omega_1) of a restricted deformation is
a cocycle as it stands.  Kernels do not depend on the sign, so only d^1_* sees it.

Everything that evaluates a cochain at fixed vectors is linear in the cochain
coordinates, so evaluations are built as matrices over those coordinates.  The
cocycle space is then a kernel computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product
from math import comb

import numpy as np

from .algebra import (
    DEFAULT_MAX_SWEEP,
    LieModule,
    RestrictedModule,
    as_array,
    pmap_eval,
)
from .cohomology_ce import CeCochain, ce_matrix, index_tuples
from .gf import all_vectors, in_span, inv, matrix_power, nullspace, rank, row_basis, vector_index


def _require_odd(module: LieModule) -> None:
    if module.p == 2:
        raise ValueError("the (*)-extension needs p > 2; use cohomology_char2 in characteristic 2")


def _power(module: LieModule, v) -> np.ndarray:
    """p-map of ``v`` in the algebra acting on ``module``."""
    R = module.algebra
    if R.p ** R.dim <= DEFAULT_MAX_SWEEP:
        return R.pmap_table[vector_index(as_array(v, R.dim), R.p)]
    return pmap_eval(R, v)


class Layout2:
    """Coordinates of C^2_*: phi on increasing pairs, then omega on the basis."""

    def __init__(self, module: LieModule) -> None:
        n, md = module.lie.dim, module.dim
        self.module = module
        self.n = n
        self.md = md
        self.n_phi = comb(n, 2) * md
        self.n_omega = n * md
        self.size = self.n_phi + self.n_omega

    def split(self, coords) -> tuple[np.ndarray, np.ndarray]:
        coords = np.asarray(coords, dtype=np.int64).reshape(-1)
        return coords[: self.n_phi], coords[self.n_phi:].reshape(self.n, self.md)


@lru_cache(maxsize=None)
def _pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = index_tuples(n, 2)
    return (np.array([a for a, _ in pairs], dtype=np.int64), np.array([b for _, b in pairs], dtype=np.int64))


def _pair_coef(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    a, b = _pair_arrays(len(u))
    return u[a] * w[b] - u[b] * w[a]


def phi2_matrix(module: LieModule, u, w) -> np.ndarray:
    """``E`` with ``phi(u, w) = E @ phi_coords`` for alternating bilinear phi."""
    n, md, p = module.lie.dim, module.dim, module.p
    coef = _pair_coef(as_array(u, n), as_array(w, n)) % p
    return np.kron(coef[None, :], np.eye(md, dtype=np.int64)) % p


def star_correction_matrix(module: LieModule, x, y) -> np.ndarray:
    """Matrix (over phi coordinates) of the (*) correction term for the pair (x, y)."""
    _require_odd(module)
    L = module.lie
    p, n, md = module.p, L.dim, module.dim
    x, y = as_array(x, n) % p, as_array(y, n) % p
    npairs = comb(n, 2)
    total = np.zeros((md, npairs, md), dtype=np.int64)
    if not x.any() or not y.any():
        return total.reshape(md, npairs * md)
    args = (x, y)
    rep = (module.rep(x), module.rep(y))
    nested_cache: dict[tuple[int, ...], np.ndarray] = {}
    ops_cache: dict[tuple[int, ...], np.ndarray] = {(): np.eye(md, dtype=np.int64)}

    def nested(prefix: tuple[int, ...]) -> np.ndarray:
        if prefix not in nested_cache:
            if len(prefix) == 1:
                nested_cache[prefix] = args[prefix[0]]
            else:
                nested_cache[prefix] = L.bracket(nested(prefix[:-1]), args[prefix[-1]])
        return nested_cache[prefix]

    def ops(word: tuple[int, ...]) -> np.ndarray:
        # word lists the acting elements from last-applied to first-applied
        if word not in ops_cache:
            ops_cache[word] = rep[word[0]] @ ops(word[1:]) % p
        return ops_cache[word]

    for tail in product((0, 1), repeat=p - 2):
        seq = (0, 1) + tail
        weight = inv(seq.count(0), p)
        for k in range(p - 1):
            inner = nested(seq[: p - k - 1])
            if not inner.any():
                continue
            coef = _pair_coef(inner, args[seq[p - k - 1]]) % p
            if not coef.any():
                continue
            op = ops(tuple(reversed(seq[p - k:])))
            total += ((-1) ** k * weight) * op[:, None, :] * coef[None, :, None]
            total %= p
    return total.reshape(md, npairs * md)


def star_matrix(module: LieModule, v, order=None) -> np.ndarray:
    """Matrix over C^2_* coordinates giving omega(v) by the (*)-extension."""
    _require_odd(module)
    lay = Layout2(module)
    p, n, md = module.p, lay.n, lay.md
    v = as_array(v, n) % p
    out = np.zeros((md, lay.size), dtype=np.int64)
    u = np.zeros(n, dtype=np.int64)
    for i in range(n) if order is None else order:
        a = int(v[i])
        if a == 0:
            continue
        step = np.zeros(n, dtype=np.int64)
        step[i] = a
        col = lay.n_phi + i * md
        out[:, col:col + md] += pow(a, p, p) * np.eye(md, dtype=np.int64)
        out[:, : lay.n_phi] += star_correction_matrix(module, u, step)
        out %= p
        u = (u + step) % p
    return out


@dataclass
class StarCochain2:
    """A restricted 2-cochain: alternating ``phi`` and basis values of ``omega``."""

    phi: CeCochain
    omega_basis: np.ndarray

    def __post_init__(self) -> None:
        mod = self.phi.module
        self.omega_basis = mod.field.reduce(self.omega_basis).reshape(mod.lie.dim, mod.dim)

    @classmethod
    def from_coords(cls, module: LieModule, coords) -> "StarCochain2":
        lay = Layout2(module)
        phi, om = lay.split(coords)
        return cls(CeCochain(module, 2, phi), om)

    @property
    def module(self) -> LieModule:
        return self.phi.module

    def coords(self) -> np.ndarray:
        return np.concatenate([self.phi.coords(), self.omega_basis.reshape(-1)])

    def omega(self, v) -> np.ndarray:
        return star_extend(self.phi, self.omega_basis, v)

    def is_zero(self) -> bool:
        return self.phi.is_zero() and not self.omega_basis.any()


def star_extend(phi: CeCochain, omega_basis, v) -> np.ndarray:
    """Value at ``v`` of the map with the (*)-property w.r.t. ``phi`` and given basis values."""
    module = phi.module
    coords = np.concatenate([phi.coords(), module.field.reduce(omega_basis).reshape(-1)])
    return star_matrix(module, v) @ coords % module.p


# -- ind maps and restricted differentials ---------------------------------


def _psi_matrix(module: LieModule, v) -> np.ndarray:
    """Matrix over degree-1 coordinates with ``psi(v) = E @ psi_coords``."""
    v = as_array(v, module.lie.dim)
    return np.kron(v[None, :], np.eye(module.dim, dtype=np.int64)) % module.p


def ind1_matrix(module: RestrictedModule, v) -> np.ndarray:
    """``ind1(psi)(v) = psi(v^[p]) - v^{p-1} . psi(v)`` as a matrix over psi coordinates."""
    p = module.p
    v = as_array(v, module.lie.dim)
    act = matrix_power(module.rep(v), p - 1, p)
    return (_psi_matrix(module, _power(module, v)) - act @ _psi_matrix(module, v)) % p


class Ind1Map:
    """The map ``x -> psi(x^[p]) - x^{p-1} psi(x)`` induced by a 1-cochain."""

    def __init__(self, psi: CeCochain) -> None:
        if psi.degree != 1:
            raise ValueError("ind1 takes a 1-cochain")
        self.psi = psi

    def __call__(self, v) -> np.ndarray:
        return ind1_matrix(self.psi.module, v) @ self.psi.coords() % self.psi.p

    def basis_values(self) -> np.ndarray:
        n = self.psi.lie.dim
        return np.stack([self(e) for e in np.eye(n, dtype=np.int64)])


def ind1(psi: CeCochain) -> Ind1Map:
    return Ind1Map(psi)


def ind2_matrix(module: RestrictedModule, x, y, beta_y=None) -> np.ndarray:
    """Matrix over C^2_* coordinates of ``ind2(alpha, beta)(x, y)``.

    ``alpha(x, y^[p]) - sum_{i+j=p-1} (-1)^i y^i . alpha([..[x, y], .., y], y) + x . beta(y)``
    where the bracket nests ``j`` copies of ``y`` and ``beta`` is the (*)-extension.
    """
    lay = Layout2(module)
    L = module.lie
    p, n = module.p, lay.n
    x, y = as_array(x, n) % p, as_array(y, n) % p
    out = np.zeros((lay.md, lay.size), dtype=np.int64)
    out[:, : lay.n_phi] += phi2_matrix(module, x, _power(module, y))
    ry = L.right(y)
    ya = module.rep(y)
    nested = x
    for j in range(p):
        i = p - 1 - j
        term = matrix_power(ya, i, p) @ phi2_matrix(module, nested, y)
        out[:, : lay.n_phi] -= (-1) ** i * term
        nested = ry @ nested % p
    if y.any():
        if beta_y is None:
            beta_y = star_matrix(module, y)
        out += module.rep(x) @ beta_y
    return out % p


class Ind2Map:
    """The map ``(x, y) -> ind2(alpha, beta)(x, y)`` for a restricted 2-cochain."""

    def __init__(self, cochain: StarCochain2) -> None:
        self.cochain = cochain

    def __call__(self, x, y) -> np.ndarray:
        c = self.cochain
        return ind2_matrix(c.module, x, y) @ c.coords() % c.module.p


def ind2(alpha: CeCochain, beta) -> Ind2Map:
    """``beta`` is a :class:`StarCochain2` or the basis values of omega."""
    if isinstance(beta, StarCochain2):
        return Ind2Map(beta)
    return Ind2Map(StarCochain2(alpha, beta))


def d_star_1_matrix(module: RestrictedModule) -> np.ndarray:
    """Matrix of d^1_* from 1-cochain coordinates to C^2_* coordinates."""
    _require_odd(module)
    n = module.lie.dim
    top = -ce_matrix(module, 1)
    eye = np.eye(n, dtype=np.int64)
    bottom = np.vstack([ind1_matrix(module, eye[i]) for i in range(n)])
    return np.vstack([top, bottom]) % module.p


def d_star_2_matrix(module: RestrictedModule) -> np.ndarray:
    """Matrix of d^2_*: CE part on basis triples, ind2 on all ordered basis pairs."""
    _require_odd(module)
    lay = Layout2(module)
    n = lay.n
    ce = -ce_matrix(module, 2)
    top = np.hstack([ce, np.zeros((ce.shape[0], lay.n_omega), dtype=np.int64)])
    eye = np.eye(n, dtype=np.int64)
    rows = [ind2_matrix(module, eye[i], eye[j]) for i in range(n) for j in range(n)]
    return np.vstack([top] + rows) % module.p


def double_star_correction(alpha: CeCochain, x, y1, y2) -> np.ndarray:
    """Correction term of the (**) rule, so that
    ``beta(x, y1 + y2) = beta(x, y1) + beta(x, y2) + double_star_correction(alpha, x, y1, y2)``.

    Computes ``-sum_h 1/#y1 sum_j (-1)^j sum_{k=0}^{j} C(j, k) h_p ... h_{p-k+1} .
    alpha([x, h_{p-k}, .., h_{p-j+1}], [h_1, .., h_{p-j-1}], h_{p-j})`` with left-normed
    brackets.  This reading uses every h_i exactly once and is checked against
    ind2 only for p = 3, so other characteristics are refused.
    """
    module = alpha.module
    if alpha.degree != 3:
        raise ValueError("the (**) rule takes a 3-cochain")
    p = module.p
    if p != 3:
        raise NotImplementedError("the (**) correction is only available for p = 3")
    L = module.lie
    n = L.dim
    x, y1, y2 = (as_array(v, n) % p for v in (x, y1, y2))
    args = (y1, y2)
    total = np.zeros(module.dim, dtype=np.int64)
    for tail in product((0, 1), repeat=p - 2):
        h = (0, 1) + tail
        weight = inv(h.count(0), p)
        for j in range(p - 1):
            mid = args[h[0]]
            for q in range(1, p - j - 1):
                mid = L.bracket(mid, args[h[q]])
            third = args[h[p - j - 1]]
            for k in range(j + 1):
                xb = x
                for q in range(p - j, p - k):
                    xb = L.bracket(xb, args[h[q]])
                val = alpha(xb, mid, third)
                for q in range(p - k, p):
                    val = module.act(args[h[q]], val)
                total = (total - (-1) ** j * weight * comb(j, k) * val) % p
    return total


@dataclass
class StarCochain3:
    """A restricted 3-cochain: ``alpha`` of degree 3 and ``beta`` on ordered basis pairs."""

    alpha: CeCochain
    beta_basis: np.ndarray  # shape (n, n, module_dim)

    @property
    def module(self) -> LieModule:
        return self.alpha.module

    def beta(self, x, y) -> np.ndarray:
        """Linear in ``x``; in ``y`` folded over coordinates with the (**) rule (p = 3)."""
        module = self.module
        p, n = module.p, module.lie.dim
        x, y = as_array(x, n) % p, as_array(y, n) % p
        out = np.zeros(module.dim, dtype=np.int64)
        u = np.zeros(n, dtype=np.int64)
        for i in np.flatnonzero(y):
            step = np.zeros(n, dtype=np.int64)
            step[i] = y[i]
            out += pow(int(y[i]), p, p) * (x @ np.asarray(self.beta_basis)[:, i, :])
            if u.any():
                out += double_star_correction(self.alpha, x, u, step)
            out %= p
            u = (u + step) % p
        return out

    def is_zero(self) -> bool:
        return self.alpha.is_zero() and not np.asarray(self.beta_basis).any()


def d_star_1(psi: CeCochain) -> StarCochain2:
    module = psi.module
    coords = d_star_1_matrix(module) @ psi.coords() % module.p
    return StarCochain2.from_coords(module, coords)


def d_star_2(c: StarCochain2) -> StarCochain3:
    module = c.module
    n, md = module.lie.dim, module.dim
    out = d_star_2_matrix(module) @ c.coords() % module.p
    n3 = comb(n, 3) * md
    return StarCochain3(CeCochain(module, 3, out[:n3]), out[n3:].reshape(n, n, md))


# -- H^2_* -----------------------------------------------------------------


class OracleMismatch(AssertionError):
    """Raised when a basis-tuple cocycle fails the all-vector check."""


@dataclass
class H2Result:
    dim: int
    cocycles: np.ndarray  # rows: C^2_* coordinates
    coboundaries: np.ndarray
    module: LieModule
    oracle_checked: bool = False

    def cocycle_list(self) -> list[StarCochain2]:
        return [StarCochain2.from_coords(self.module, r) for r in self.cocycles]

    def coboundary_list(self) -> list[StarCochain2]:
        return [StarCochain2.from_coords(self.module, r) for r in self.coboundaries]

    def is_cocycle(self, c: StarCochain2) -> bool:
        return in_span(self.cocycles, c.coords(), self.module.p)

    def is_coboundary(self, c: StarCochain2) -> bool:
        return in_span(self.coboundaries, c.coords(), self.module.p)


def oracle_check_2cocycles(module: RestrictedModule, rows: np.ndarray) -> None:
    """Check d^2_* = 0 for every row at every pair of vectors (x, y).

    ``ind2`` is linear in ``x`` by construction, so for each ``y`` the values at
    all ``x`` are obtained from one matrix product.  The CE part is multilinear
    and is checked at all triples through the alternating tensor.
    """
    p, n = module.p, module.lie.dim
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    if rows.size == 0:
        return
    lay = Layout2(module)
    vecs = all_vectors(p, n)
    eye = np.eye(n, dtype=np.int64)
    for y in vecs:
        beta_y = star_matrix(module, y)
        per_basis = np.stack([ind2_matrix(module, eye[k], y, beta_y) @ rows.T % p for k in range(n)])
        values = np.einsum("Xk,kmr->Xmr", vecs, per_basis) % p
        if values.any():
            bad = np.argwhere(values)[0]
            raise OracleMismatch(
                f"ind2 of cocycle {bad[2]} is nonzero at x={vecs[bad[0]].tolist()}, y={y.tolist()}"
            )
    for r, coords in enumerate(rows):
        phi, _ = lay.split(coords)
        d = CeCochain(module, 3, ce_matrix(module, 2) @ phi % p)
        if d.values.any():
            raise OracleMismatch(f"CE differential of cocycle {r} is nonzero")


def h2_star(
    R,
    M: RestrictedModule,
    max_sweep: int = DEFAULT_MAX_SWEEP,
    oracle: bool = True,
) -> H2Result:
    """dim H^2_*(L, M) with bases of the cocycles and coboundaries.

    Cocycle conditions are imposed on basis tuples; when ``p**(2n) <= max_sweep``
    every returned cocycle is re-checked at all vector pairs and any mismatch
    raises :class:`OracleMismatch`.
    """
    if M.algebra is not R and M.algebra.lie != R.lie:
        raise ValueError("module belongs to a different algebra")
    _require_odd(M)
    p, n = M.p, M.lie.dim
    Z = nullspace(d_star_2_matrix(M), p)
    B = row_basis((d_star_1_matrix(M)).T, p)
    for b in B:
        if not in_span(Z, b, p):
            raise AssertionError("a restricted coboundary failed the cocycle conditions")
    checked = False
    if oracle and p ** (2 * n) <= max_sweep:
        oracle_check_2cocycles(M, Z)
        checked = True
    return H2Result(len(Z) - len(B), Z, B, M, checked)


def h1_star_dim(M: RestrictedModule) -> int:
    """dim Z^1_* - dim B^1_* with d^0_* = d^0_CE."""
    p = M.p
    D1 = d_star_1_matrix(M)
    z1 = D1.shape[1] - rank(D1, p)
    b1 = rank(ce_matrix(M, 0), p)
    return z1 - b1


# -- the abelian complex ---------------------------------------------------


@lru_cache(maxsize=None)
def ab_components(n: int, k: int) -> tuple[tuple[int, tuple, tuple], ...]:
    """Index set of C^k_ab: (t, x multiset, y increasing tuple) with 2t + s = k."""
    out = []
    for t in range(k // 2 + 1):
        s = k - 2 * t
        if s > n:
            continue
        for xs in combinations_with_replacement(range(n), t):
            for ys in combinations(range(n), s):
                out.append((t, xs, ys))
    return tuple(out)


class AbCochain:
    """A cochain of the abelian complex, stored on (x monomial, y tuple) basis keys."""

    def __init__(self, module: LieModule, degree: int, values) -> None:
        n = module.lie.dim
        keys = ab_components(n, degree)
        values = module.field.reduce(values).reshape(len(keys), module.dim)
        self.module = module
        self.degree = degree
        self.values = values

    @property
    def keys(self):
        return ab_components(self.module.lie.dim, self.degree)

    def coords(self) -> np.ndarray:
        return self.values.reshape(-1).copy()

    def is_zero(self) -> bool:
        return not self.values.any()


def _ab_check(module: RestrictedModule) -> None:
    if not module.lie.is_abelian():
        raise ValueError("the abelian complex needs an abelian Lie algebra")


def ab_matrix(module: RestrictedModule, k: int) -> np.ndarray:
    """Matrix of d^k_ab.

    beta_t(x; y) = sum_j (-1)^j y_j . gamma_t(x; y^_j)
                 + sum_i gamma_{t-1}(x^_i; x_i^[p], y)
                 - sum_i x_i^{p-1} . gamma_{t-1}(x^_i; x_i, y)
    """
    _ab_check(module)
    R = module.algebra
    p, n, md = module.p, module.lie.dim, module.dim
    src = {key: pos for pos, key in enumerate(ab_components(n, k))}
    out_keys = ab_components(n, k + 1)
    D = np.zeros((len(out_keys) * md, len(src) * md), dtype=np.int64)
    act_pow = [matrix_power(module.rho[i], p - 1, p) for i in range(n)]

    def add(row: int, key, coeff_matrix: np.ndarray) -> None:
        t, xs, ys = key
        sign, srt = _sort_sign(ys)
        if sign == 0:
            return
        col = src[(t, tuple(sorted(xs)), srt)]
        D[row * md:(row + 1) * md, col * md:(col + 1) * md] += sign * coeff_matrix

    eye = np.eye(md, dtype=np.int64)
    for row, (t, xs, ys) in enumerate(out_keys):
        for j, yj in enumerate(ys):
            sign = -1 if (j + 1) % 2 else 1
            add(row, (t, xs, ys[:j] + ys[j + 1:]), sign * module.rho[yj])
        for i in range(t):
            rest = xs[:i] + xs[i + 1:]
            xi = xs[i]
            for k_idx in np.flatnonzero(R.images[xi]):
                add(row, (t - 1, rest, (int(k_idx),) + ys), int(R.images[xi][k_idx]) * eye)
            add(row, (t - 1, rest, (xi,) + ys), -act_pow[xi])
    return D % p


def _sort_sign(seq):
    from .cohomology_ce import sort_with_sign

    return sort_with_sign(seq)


def ab_diff(gamma: AbCochain) -> AbCochain:
    module = gamma.module
    if gamma.degree + 1 > module.p:
        raise ValueError("the abelian complex is defined up to degree p")
    D = ab_matrix(module, gamma.degree)
    return AbCochain(module, gamma.degree + 1, D @ gamma.coords())


def ab_cohomology_dim(module: RestrictedModule, k: int) -> int:
    _ab_check(module)
    p = module.p
    if k > p:
        raise ValueError("the abelian complex is defined up to degree p")
    Dk = ab_matrix(module, k)
    kernel = Dk.shape[1] - rank(Dk, p)
    image = rank(ab_matrix(module, k - 1), p) if k >= 1 else 0
    return kernel - image


__all__ = [
    "StarCochain2",
    "StarCochain3",
    "AbCochain",
    "H2Result",
    "OracleMismatch",
    "Layout2",
    "star_extend",
    "double_star_correction",
    "star_matrix",
    "star_correction_matrix",
    "phi2_matrix",
    "ind1",
    "ind1_matrix",
    "ind2",
    "ind2_matrix",
    "d_star_1",
    "d_star_2",
    "d_star_1_matrix",
    "d_star_2_matrix",
    "h2_star",
    "h1_star_dim",
    "oracle_check_2cocycles",
    "ab_components",
    "ab_matrix",
    "ab_diff",
    "ab_cohomology_dim",
]

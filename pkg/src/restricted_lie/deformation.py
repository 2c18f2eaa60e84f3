"""Truncated formal deformations of restricted Lie algebras.

A deformation of order N is stored as structure tensors ``m[i]`` of shape
(n, n, n), with ``m[i][a, b]`` the value ``m_i(e_a, e_b)``, and basis images
``omega[i]`` whose row k is ``omega_i(e_k)``; index 0 is the base algebra.

Series in t are numpy arrays with a t-axis of length N + 1 placed before the
vector axis, truncated at t^{N+1}.  The deformed p-map is evaluated on a
series ``u = sum_k a_k(t) e_k`` by the Jacobson fold over the ring
F[t]/(t^{N+1}):

    omega_t(u + a e_k) = omega_t(u) + a^p omega_t(e_k) + sum_i s_i(u, a e_k)

where the s_i use the deformed bracket and ``a(t)^p = a(t^p)`` over F_p.  For
p = 2 this is ``omega_t(u + v) = omega_t(u) + omega_t(v) + m_t(u, v)``.

Conjugation by a formal automorphism phi is ``m'_t = phi^-1 m_t(phi, phi)`` and
``omega'_t = phi^-1 omega_t phi``.  With this direction the first-order parts
satisfy ``(m_1 - m'_1, omega_1 - omega'_1) = d^1_*(phi_1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .algebra import DEFAULT_MAX_SWEEP, RestrictedLieAlgebra, adjoint_module, as_array
from .cohomology_ce import CeCochain, ce_matrix, index_tuples
from .gf import all_vectors, inv, solve_raw

MAX_ORDER = 8


# -- series arithmetic over F[t]/(t^T) --------------------------------------
# Leading axes are batch axes; then t, then the vector/matrix axes.


def _mul_mv(M: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    T = M.shape[-3]
    out = np.zeros(np.broadcast_shapes(M.shape[:-2], v.shape[:-1]) + (M.shape[-2],), dtype=np.int64)
    for i in range(T):
        for j in range(T - i):
            out[..., i + j, :] += np.einsum("...ab,...b->...a", M[..., i, :, :], v[..., j, :])
    return out % p


def _mul_mm(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    T = A.shape[-3]
    out = np.zeros(np.broadcast_shapes(A.shape, B.shape), dtype=np.int64)
    for i in range(T):
        for j in range(T - i):
            out[..., i + j, :, :] += A[..., i, :, :] @ B[..., j, :, :]
    return out % p


def _mul_sv(s: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    T = s.shape[-1]
    out = np.zeros(np.broadcast_shapes(s.shape + (1,), v.shape), dtype=np.int64)
    for i in range(T):
        for j in range(T - i):
            out[..., i + j, :] += s[..., i, None] * v[..., j, :]
    return out % p


def _left(C: np.ndarray, a: np.ndarray, p: int) -> np.ndarray:
    """Series matrix of ``v -> m_t(a, v)``; entry [c, b] of order q."""
    T = C.shape[0]
    out = np.zeros(a.shape[:-2] + (T, C.shape[1], C.shape[1]), dtype=np.int64)
    for i in range(T):
        for k in range(T - i):
            out[..., i + k, :, :] += np.einsum("...a,abc->...cb", a[..., i, :], C[k])
    return out % p


def _right(C: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Series matrix of ``v -> m_t(v, b)``."""
    T = C.shape[0]
    out = np.zeros(b.shape[:-2] + (T, C.shape[1], C.shape[1]), dtype=np.int64)
    for j in range(T):
        for k in range(T - j):
            out[..., j + k, :, :] += np.einsum("...b,abc->...ca", b[..., j, :], C[k])
    return out % p


def _series_bracket(C, a, b, p):
    return _mul_mv(_left(C, a, p), b, p)


def _s_sum(C, x, y, p):
    """Jacobson's ``sum_i s_i(x, y)`` for the bracket C on series x, y."""
    adx, ady = _left(C, x, p), _left(C, y, p)
    poly = [x % p]
    for _ in range(p - 1):
        nxt = [np.zeros_like(x) for _ in range(len(poly) + 1)]
        for d, coef in enumerate(poly):
            nxt[d] += _mul_mv(ady, coef, p)
            nxt[d + 1] += _mul_mv(adx, coef, p)
        poly = [c % p for c in nxt]
    total = np.zeros_like(x)
    for i in range(1, p):
        total += inv(i, p) * poly[i - 1]
    return total % p


def _frobenius(s: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros_like(s)
    T = s.shape[-1]
    for i in range(0, (T - 1) // p + 1):
        out[..., p * i] = s[..., i]
    return out


def _omega_series(C, W, u, p):
    """Deformed p-map of the series ``u`` (batched), by the fold over coordinates."""
    n = u.shape[-1]
    acc = np.zeros_like(u)
    out = np.zeros_like(u)
    for k in range(n):
        a = u[..., :, k]
        if not a.any():
            continue
        step = np.zeros_like(u)
        step[..., :, k] = a
        out += _mul_sv(_frobenius(a, p), W[:, k, :], p)
        if acc.any():
            out += _s_sum(C, acc, step, p)
        acc = (acc + step) % p
    return out % p


def _as_series(v, n: int, T: int) -> np.ndarray:
    """Lift vectors (any batch shape) to constant series."""
    v = np.asarray(v, dtype=np.int64)
    out = np.zeros(v.shape[:-1] + (T, n), dtype=np.int64)
    out[..., 0, :] = v
    return out


# -- data types --------------------------------------------------------------


def _bracket_tensor(obj, n: int, p: int) -> np.ndarray:
    if isinstance(obj, CeCochain):
        if obj.degree != 2 or obj.module.dim != n:
            raise ValueError("a deformation term must be a 2-cochain with values in L")
        return obj.tensor()
    c = np.asarray(obj, dtype=np.int64) % p
    if c.shape != (n, n, n):
        raise ValueError(f"bracket term must have shape {(n, n, n)}, got {c.shape}")
    if ((c + c.transpose(1, 0, 2)) % p).any() or c[np.arange(n), np.arange(n)].any():
        raise ValueError("bracket term is not alternating")
    return c


def _cochain_values(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    return np.array([c[a, b] for a, b in index_tuples(n, 2)], dtype=np.int64).reshape(-1, n)


class TruncatedDeformation:
    """``m_t = sum t^i m_i`` and ``omega_t = sum t^i omega_i`` up to order N."""

    def __init__(self, base: RestrictedLieAlgebra, m=(), omega=()) -> None:
        m, omega = list(m), list(omega)
        if len(m) != len(omega):
            raise ValueError(f"got {len(m)} bracket terms but {len(omega)} p-map terms")
        if len(m) > MAX_ORDER:
            raise ValueError(f"order {len(m)} exceeds the maximum {MAX_ORDER}")
        p, n = base.p, base.dim
        self.base = base
        self.m = np.stack([base.lie.c % p] + [_bracket_tensor(c, n, p) for c in m])
        ws = []
        for w in omega:
            w = np.asarray(w, dtype=np.int64) % p
            if w.shape != (n, n):
                raise ValueError(f"p-map term must give {n} basis images of length {n}")
            ws.append(w)
        self.omega = np.stack([base.images % p] + ws)
        self.m.setflags(write=False)
        self.omega.setflags(write=False)

    @classmethod
    def from_cochains(cls, base: RestrictedLieAlgebra, cochains) -> "TruncatedDeformation":
        """Terms given as StarCochain2 (p > 2) or degree-2 Char2Cochain objects."""
        m, omega = [], []
        n = base.dim
        for c in cochains:
            m.append(c.phi.tensor())
            om = c.omega_basis if hasattr(c, "omega_basis") else c.omega_values
            omega.append(np.asarray(om).reshape(n, n))
        return cls(base, m, omega)

    @property
    def order(self) -> int:
        return len(self.m) - 1

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def dim(self) -> int:
        return self.base.dim

    def truncate(self, q: int) -> "TruncatedDeformation":
        if not 0 <= q <= self.order:
            raise ValueError(f"cannot truncate an order-{self.order} deformation at {q}")
        return TruncatedDeformation(self.base, self.m[1:q + 1], self.omega[1:q + 1])

    def extend(self, m_next, omega_next) -> "TruncatedDeformation":
        return TruncatedDeformation(self.base, list(self.m[1:]) + [m_next], list(self.omega[1:]) + [omega_next])

    def term(self, i: int):
        """The pair (m_i, omega_i) as a restricted 2-cochain of the adjoint module."""
        module = adjoint_module(self.base)
        phi = CeCochain(module, 2, _cochain_values(self.m[i]))
        if self.p == 2:
            from .cohomology_char2 import Char2Cochain

            return Char2Cochain(module, 2, phi, self.omega[i].reshape(self.dim, 1, self.dim))
        from .cohomology_restricted import StarCochain2

        return StarCochain2(phi, self.omega[i])

    def _lift(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.int64) % self.p
        if u.ndim == 1:
            return _as_series(u, self.dim, self.order + 1)
        if u.shape != (self.order + 1, self.dim):
            raise ValueError(f"expected a vector or a series of shape {(self.order + 1, self.dim)}")
        return u

    def bracket(self, x, y) -> np.ndarray:
        """``m_t(x, y)`` for vectors or series of shape (N + 1, n)."""
        return _series_bracket(self.m, self._lift(x), self._lift(y), self.p)

    def power(self, u) -> np.ndarray:
        """``omega_t(u)`` for a vector or a series of shape (N + 1, n)."""
        return _omega_series(self.m, self.omega, self._lift(u), self.p)

    def __repr__(self) -> str:
        return f"TruncatedDeformation(order={self.order}, p={self.p}, dim={self.dim})"


class FormalAutomorphism:
    """``phi = sum t^i phi_i`` with ``phi_0 = id``; ``phis[i] @ v`` is ``phi_i(v)``."""

    def __init__(self, p: int, phis) -> None:
        phis = [np.asarray(f, dtype=np.int64) % p for f in phis]
        if not phis:
            raise ValueError("a formal automorphism needs at least phi_0")
        n = phis[0].shape[0]
        if any(f.shape != (n, n) for f in phis):
            raise ValueError("all phi_i must be square matrices of the same size")
        if not np.array_equal(phis[0], np.eye(n, dtype=np.int64)):
            raise ValueError("phi_0 must be the identity")
        self.p = p
        self.dim = n
        self.phis = np.stack(phis)
        self.phis.setflags(write=False)

    @classmethod
    def identity(cls, p: int, n: int, order: int = 0) -> "FormalAutomorphism":
        return cls(p, [np.eye(n, dtype=np.int64)] + [np.zeros((n, n), dtype=np.int64)] * order)

    @classmethod
    def linear(cls, p: int, psi) -> "FormalAutomorphism":
        """``id + t psi``."""
        psi = np.asarray(psi, dtype=np.int64)
        return cls(p, [np.eye(psi.shape[0], dtype=np.int64), psi])

    @property
    def order(self) -> int:
        return len(self.phis) - 1

    def series(self, T: int) -> np.ndarray:
        out = np.zeros((T, self.dim, self.dim), dtype=np.int64)
        k = min(T, len(self.phis))
        out[:k] = self.phis[:k]
        return out

    def inverse(self, T: int) -> np.ndarray:
        """Series of the inverse map truncated at t^T."""
        P = self.series(T)
        out = np.zeros_like(P)
        out[0] = np.eye(self.dim, dtype=np.int64)
        for q in range(1, T):
            acc = np.zeros((self.dim, self.dim), dtype=np.int64)
            for i in range(1, q + 1):
                acc += P[i] @ out[q - i]
            out[q] = -acc % self.p
        return out % self.p

    def apply(self, u: np.ndarray, T: int) -> np.ndarray:
        """Image of series (batched, shape (..., T, n))."""
        return _mul_mv(self.series(T), u, self.p)


# -- verification -----------------------------------------------------------


@dataclass
class OrderCheck:
    order: int
    jacobi: bool
    pmap: bool
    additivity: bool | None = None
    witness: str | None = None

    @property
    def passed(self) -> bool:
        return self.jacobi and self.pmap and self.additivity is not False


@dataclass
class DeformationReport:
    orders: list[OrderCheck]
    exhaustive: bool

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.orders)

    def __bool__(self) -> bool:
        return self.passed

    def first_failure(self) -> OrderCheck | None:
        return next((o for o in self.orders if not o.passed), None)


def _sweep(p: int, n: int, max_sweep: int, samples: int, seed: int) -> tuple[np.ndarray, bool]:
    """All vectors when ``p^(2n)`` pairs fit the budget, else basis plus a random sample."""
    if p ** (2 * n) <= max_sweep:
        return all_vectors(p, n), True
    rng = np.random.default_rng(seed)
    return np.vstack([np.eye(n, dtype=np.int64), rng.integers(0, p, size=(samples, n))]), False


def _jacobi_by_order(C: np.ndarray, p: int) -> np.ndarray:
    T = C.shape[0]
    out = np.zeros((T,) + (C.shape[1],) * 4, dtype=np.int64)
    for i in range(T):
        for k in range(T - i):
            t = np.einsum("yzw,xwd->xyzd", C[k], C[i])
            out[i + k] += t + t.transpose(2, 0, 1, 3) + t.transpose(1, 2, 0, 3)
    return out % p


def _pmap_defect(C, W, ys, p):
    """``R_{omega_t(y)} - R_y^p`` per y, as series matrices."""
    T, n = C.shape[0], C.shape[1]
    Y = _as_series(ys, n, T)
    lhs = _right(C, _omega_series(C, W, Y, p), p)
    Ry = _right(C, Y, p)
    rhs = Ry
    for _ in range(p - 1):
        rhs = _mul_mm(rhs, Ry, p)
    return (lhs - rhs) % p


def _pairs(vecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    N = len(vecs)
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return vecs[i.reshape(-1)], vecs[j.reshape(-1)]


def _additivity_defect(D: TruncatedDeformation, xs, ys, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Per pair, the series ``omega_t(x+y) - omega_t(x) - omega_t(y) - s_t(x, y)``."""
    p, n, T = D.p, D.dim, D.order + 1
    bad = np.zeros((len(xs), T), dtype=bool)
    for start in range(0, len(xs), chunk):
        X = _as_series(xs[start:start + chunk], n, T)
        Y = _as_series(ys[start:start + chunk], n, T)
        lhs = _omega_series(D.m, D.omega, (X + Y) % p, p)
        rhs = _omega_series(D.m, D.omega, X, p) + _omega_series(D.m, D.omega, Y, p) + _s_sum(D.m, X, Y, p)
        bad[start:start + chunk] = ((lhs - rhs) % p).any(axis=-1)
    return bad, np.flatnonzero(bad.any(axis=1))


def verify_deformation(
    D: TruncatedDeformation,
    max_sweep: int = DEFAULT_MAX_SWEEP,
    samples: int = 200,
    seed: int = 0,
    pair_budget: int = 4096,
) -> DeformationReport:
    """Check the deformed Jacobi and p-map identities coefficient by coefficient.

    Jacobi is checked on basis triples.  The p-map identity
    ``m_t(x, omega_t(y)) = m_t[x, y, .., y]`` is linear in x, so for each y the
    two sides are compared as series of matrices; the y run over all vectors
    when ``p^(2n) <= max_sweep`` and over the basis plus a seeded sample
    otherwise.  Additivity of omega_t against Jacobson's formula for m_t is
    checked on all pairs when there are at most ``pair_budget`` of them and on
    seeded random pairs otherwise.
    """
    p, n, T = D.p, D.dim, D.order + 1
    J = _jacobi_by_order(D.m, p)
    ys, exhaustive = _sweep(p, n, max_sweep, samples, seed)
    defect = _pmap_defect(D.m, D.omega, ys, p)
    if exhaustive and len(ys) ** 2 <= min(max_sweep, pair_budget):
        xs, zs = _pairs(ys)
    else:
        rng = np.random.default_rng(seed + 1)
        xs = rng.integers(0, p, size=(samples, n))
        zs = rng.integers(0, p, size=(samples, n))
    add_bad, _ = _additivity_defect(D, xs, zs)
    names = D.base.basis_names
    reports = []
    for q in range(T):
        witness = None
        jac = not J[q].any()
        if not jac:
            a, b, c, _ = np.argwhere(J[q])[0]
            witness = f"Jacobi fails at ({names[a]}, {names[b]}, {names[c]})"
        bad_y = np.flatnonzero(defect[:, q].any(axis=(1, 2)))
        pm = len(bad_y) == 0
        if not pm and witness is None:
            witness = f"p-map identity fails at y={ys[bad_y[0]].tolist()}"
        bad_pair = np.flatnonzero(add_bad[:, q])
        add = len(bad_pair) == 0
        if not add and witness is None:
            k = bad_pair[0]
            witness = f"omega_t is not additive at x={xs[k].tolist()}, y={zs[k].tolist()}"
        reports.append(OrderCheck(q, jac, pm, add, witness))
    return DeformationReport(reports, exhaustive)


# -- infinitesimals and triviality ------------------------------------------


def _d1_matrix(base: RestrictedLieAlgebra) -> np.ndarray:
    module = adjoint_module(base)
    if base.p == 2:
        from .cohomology_char2 import d1_matrix

        return d1_matrix(module)
    from .cohomology_restricted import d_star_1_matrix

    return d_star_1_matrix(module)


def _is_cocycle(c) -> bool:
    if c.module.p == 2:
        from .cohomology_char2 import d_star2

        return d_star2(c).is_zero()
    from .cohomology_restricted import d_star_2

    return d_star_2(c).is_zero()


def is_trivial_infinitesimal(c) -> np.ndarray | None:
    """A matrix psi with ``c = d^1_*(psi)``, or None when the class is nonzero.

    ``c`` is a StarCochain2 (p > 2) or a degree-2 Char2Cochain on the adjoint
    module.  ``psi[:, j]`` is ``psi(e_j)``.  The deformation ``m + t m_1``,
    ``omega + t omega_1`` is then the conjugate of the base by ``id - t psi``.
    """
    if not _is_cocycle(c):
        raise ValueError("not a restricted 2-cocycle")
    base = c.module.algebra
    n, p = base.dim, base.p
    sol = solve_raw(_d1_matrix(base), c.coords(), p)
    if sol is None:
        return None
    return sol.reshape(n, n).T % p


@dataclass
class InfinitesimalReport:
    cochain: object
    is_cocycle: bool
    trivializer: np.ndarray | None
    extension_consistent: bool

    @property
    def class_is_trivial(self) -> bool:
        return self.trivializer is not None

    def __bool__(self) -> bool:
        return self.is_cocycle


def _extension_consistent(D: TruncatedDeformation, c, max_sweep: int) -> bool:
    """The t-coefficient of omega_t agrees with the cochain's own extension of omega_1."""
    p, n = D.p, D.dim
    if p ** n > max_sweep:
        return True
    vecs = all_vectors(p, n)
    first = D.truncate(1)
    series = _omega_series(first.m, first.omega, _as_series(vecs, n, 2), p)[:, 1, :]
    if p == 2:
        ours = np.stack([c.omega(v) for v in vecs])
    else:
        from .cohomology_restricted import star_matrix

        coords = c.coords()
        ours = np.stack([star_matrix(c.module, v) @ coords % p for v in vecs])
    return np.array_equal(series % p, ours % p)


def infinitesimal_cocycle_check(D: TruncatedDeformation, max_sweep: int = DEFAULT_MAX_SWEEP) -> InfinitesimalReport:
    """Check that (m_1, omega_1) of a deformation is a restricted 2-cocycle."""
    if D.order < 1:
        raise ValueError("the deformation has no first-order term")
    report = verify_deformation(D.truncate(1), max_sweep=max_sweep)
    if not report.passed:
        raise ValueError(f"not a deformation through order 1: {report.first_failure().witness}")
    c = D.term(1)
    ok = _is_cocycle(c)
    psi = is_trivial_infinitesimal(c) if ok else None
    return InfinitesimalReport(c, ok, psi, _extension_consistent(D, c, max_sweep))


# -- equivalence ------------------------------------------------------------


def conjugate(D: TruncatedDeformation, phi: FormalAutomorphism) -> TruncatedDeformation:
    """The deformation ``phi^-1 m_t(phi x, phi y)``, ``phi^-1 omega_t(phi x)``."""
    p, n, T = D.p, D.dim, D.order + 1
    if phi.dim != n:
        raise ValueError("automorphism and deformation have different dimensions")
    inv_s = phi.inverse(T)
    eye = np.eye(n, dtype=np.int64)
    img = phi.apply(_as_series(eye, n, T), T)  # (n, T, n)
    br = _series_bracket(D.m, img[:, None], img[None, :], p)  # (n, n, T, n)
    m_new = _mul_mv(inv_s, br, p)
    om = _mul_mv(inv_s, _omega_series(D.m, D.omega, img, p), p)
    m_terms = [m_new[:, :, q, :] for q in range(1, T)]
    w_terms = [om[:, q, :] for q in range(1, T)]
    return TruncatedDeformation(D.base, m_terms, w_terms)


@dataclass
class EquivalenceReport:
    bracket: bool
    pmap: bool
    first_order: bool
    witness: str | None = None

    @property
    def equivalent(self) -> bool:
        return self.bracket and self.pmap

    def __bool__(self) -> bool:
        return self.equivalent


def _first_order_difference(D: TruncatedDeformation, psi: np.ndarray, vecs: np.ndarray):
    """``psi m - m(., psi .) - m(psi ., .)`` on basis pairs and
    ``psi(omega(x)) - m[psi x, x, .., x]`` at each x."""
    p, n = D.p, D.dim
    c = D.m[0]
    e = np.eye(n, dtype=np.int64)
    ps = e @ psi.T  # rows psi(e_a)
    m_part = (
        np.einsum("abk,jk->abj", c, psi)
        - np.einsum("bw,awk->abk", ps, c)
        - np.einsum("aw,wbk->abk", ps, c)
    ) % p
    R = D.base
    powers = np.stack([R.power(v) for v in vecs])
    w_part = []
    for x, xp in zip(vecs, powers):
        ad = R.lie.right(x)
        v = psi @ x % p
        for _ in range(p - 1):
            v = ad @ v % p
        w_part.append((psi @ xp - v) % p)
    return m_part, np.array(w_part, dtype=np.int64).reshape(len(vecs), n)


def check_equivalence(
    D: TruncatedDeformation,
    D2: TruncatedDeformation,
    phi: FormalAutomorphism,
    max_sweep: int = DEFAULT_MAX_SWEEP,
    samples: int = 200,
    seed: int = 0,
) -> EquivalenceReport:
    """Check ``m_t(phi x, phi y) = phi(m'_t(x, y))`` and ``omega_t(phi x) = phi(omega'_t(x))``.

    Brackets are compared on basis pairs, p-maps at all vectors (or a seeded
    sample).  ``first_order`` records whether the t-coefficients satisfy
    ``m_1 - m'_1 = psi m - m(., psi .) - m(psi ., .)`` and
    ``omega_1 - omega'_1 = psi(omega(x)) - m[psi x, x, .., x]`` with psi = phi_1.
    """
    if D.base.lie != D2.base.lie or not np.array_equal(D.base.images, D2.base.images):
        raise ValueError("deformations of different restricted algebras")
    if D.order != D2.order:
        raise ValueError("deformations of different orders")
    p, n, T = D.p, D.dim, D.order + 1
    eye = np.eye(n, dtype=np.int64)
    img = phi.apply(_as_series(eye, n, T), T)
    lhs = _series_bracket(D.m, img[:, None], img[None, :], p)
    rhs = _mul_mv(phi.series(T), _series_bracket(D2.m, _as_series(eye[:, None], n, T), _as_series(eye[None, :], n, T), p), p)
    witness = None
    br_ok = np.array_equal(lhs, rhs)
    if not br_ok:
        a, b = np.argwhere((lhs != rhs).any(axis=(2, 3)))[0]
        witness = f"bracket differs at ({D.base.basis_names[a]}, {D.base.basis_names[b]})"
    vecs, _ = _sweep(p, n, max_sweep, samples, seed)
    V = _as_series(vecs, n, T)
    left = _omega_series(D.m, D.omega, phi.apply(V, T), p)
    right = phi.apply(_omega_series(D2.m, D2.omega, V, p), T)
    bad = np.flatnonzero((left != right).any(axis=(1, 2)))
    pm_ok = len(bad) == 0
    if not pm_ok and witness is None:
        witness = f"p-map differs at x={vecs[bad[0]].tolist()}"
    first = True
    if T > 1:
        psi = phi.series(T)[1]
        m_part, w_part = _first_order_difference(D, psi, vecs)
        first = np.array_equal((D.m[1] - D2.m[1]) % p, m_part)
        d_w = (_omega_series(D.m[:2], D.omega[:2], _as_series(vecs, n, 2), p)
               - _omega_series(D2.m[:2], D2.omega[:2], _as_series(vecs, n, 2), p))[:, 1, :] % p
        first = first and np.array_equal(d_w, w_part)
    return EquivalenceReport(br_ok, pm_ok, first, witness)


# -- obstructions -----------------------------------------------------------


@dataclass
class Obstruction:
    """Obs1 on basis triples (shape (n, n, n, n)) and Obs2 on basis pairs (shape (n, n, n)).

    For p > 2, ``obs2[a, b]`` is Obs2(e_a, e_b) with the p-map slot second;
    for p = 2 the quadratic slot is the first one.
    """

    order: int
    obs1: np.ndarray
    obs2: np.ndarray

    def vanishes(self) -> bool:
        return not self.obs1.any() and not self.obs2.any()


def _padded(D: TruncatedDeformation) -> tuple[np.ndarray, np.ndarray]:
    n = D.dim
    C = np.concatenate([D.m, np.zeros((1, n, n, n), dtype=np.int64)])
    W = np.concatenate([D.omega, np.zeros((1, n, n), dtype=np.int64)])
    return C, W


def _obs1_tensor(D: TruncatedDeformation) -> np.ndarray:
    C, _ = _padded(D)
    nxt = D.order + 1
    out = np.zeros((D.dim,) * 4, dtype=np.int64)
    for i in range(1, nxt):
        t = np.einsum("yzw,xwd->xyzd", C[nxt - i], C[i])
        out += t + t.transpose(2, 0, 1, 3) + t.transpose(1, 2, 0, 3)
    return out % D.p


def _obs2_matrices(D: TruncatedDeformation, ys: np.ndarray) -> np.ndarray:
    """For each y, the matrix in x of ``[t^{n+1}](m_t[x, y, .., y] - m_t(x, omega_t(y)))``
    with m_{n+1} = omega_{n+1} = 0 and omega_t(y) taken from the order-n data."""
    p, n, nxt = D.p, D.dim, D.order + 1
    C, _ = _padded(D)
    Y = _as_series(ys, n, nxt + 1)
    w = np.zeros_like(Y)
    w[..., :nxt, :] = _omega_series(D.m, D.omega, _as_series(ys, n, nxt), p)
    Ry = _right(C, Y, p)
    pw = Ry
    for _ in range(p - 1):
        pw = _mul_mm(pw, Ry, p)
    return (pw - _right(C, w, p))[..., nxt, :, :] % p


def obstruction(D: TruncatedDeformation, check: bool = True, max_sweep: int = DEFAULT_MAX_SWEEP) -> Obstruction:
    """Obstructions to extending an order-n deformation to order n + 1."""
    if check:
        report = verify_deformation(D, max_sweep=max_sweep)
        if not report.passed:
            raise ValueError(f"not a deformation of order {D.order}: {report.first_failure().witness}")
    p, n = D.p, D.dim
    obs1 = _obs1_tensor(D)
    eye = np.eye(n, dtype=np.int64)
    mats = _obs2_matrices(D, eye)  # mats[b] @ x = Obs2(x, e_b)
    if p == 2:
        obs2 = np.einsum("acb->abc", mats)
        _check_char2_additivity(D, obs1, max_sweep)
    else:
        obs2 = np.einsum("bca->abc", mats)
    return Obstruction(D.order + 1, obs1, obs2 % p)


def _check_char2_additivity(D: TruncatedDeformation, obs1: np.ndarray, max_sweep: int) -> None:
    """Obs2(x1 + x2, y) = Obs2(x1, y) + Obs2(x2, y) + Obs1(x1, x2, y) at all vectors."""
    n = D.dim
    if 2 ** (3 * n) > max_sweep:
        return
    vecs = all_vectors(2, n)
    mats = _obs2_matrices(D, vecs)  # mats[i] @ y = Obs2(vecs[i], y)
    for i, j in product(range(len(vecs)), repeat=2):
        s = int(np.flatnonzero((vecs == (vecs[i] + vecs[j]) % 2).all(axis=1))[0])
        cross = np.einsum("xyzd,x,y->dz", obs1, vecs[i], vecs[j])
        if ((mats[s] - mats[i] - mats[j] - cross) % 2).any():
            raise AssertionError(
                f"Obs2 additivity fails at x1={vecs[i].tolist()}, x2={vecs[j].tolist()}"
            )


@dataclass
class ExtensionResult:
    extends: bool
    obstruction: Obstruction
    differential: tuple[np.ndarray, np.ndarray]
    verified: bool
    candidate: tuple[np.ndarray, np.ndarray] | None = None

    def __bool__(self) -> bool:
        return self.extends


def _candidate_arrays(D: TruncatedDeformation, candidate):
    n, p = D.dim, D.p
    if isinstance(candidate, tuple):
        return _bracket_tensor(candidate[0], n, p), np.asarray(candidate[1], dtype=np.int64).reshape(n, n) % p
    om = candidate.omega_basis if hasattr(candidate, "omega_basis") else candidate.omega_values
    return candidate.phi.tensor(), np.asarray(om).reshape(n, n) % p


def _d2_of(D: TruncatedDeformation, m_next, w_next) -> tuple[np.ndarray, np.ndarray]:
    """(CE part on basis triples, omega part on basis pairs) of d^2 of the candidate."""
    module = adjoint_module(D.base)
    n, p = D.dim, D.p
    phi = CeCochain(module, 2, _cochain_values(m_next))
    if p == 2:
        from .cohomology_char2 import Char2Cochain, d_star2

        out = d_star2(Char2Cochain(module, 2, phi, w_next.reshape(n, 1, n)))
        return out.phi.tensor(), out.omega_values.reshape(n, n, n)
    from .cohomology_restricted import StarCochain2, d_star_2

    out = d_star_2(StarCochain2(phi, w_next))
    return out.alpha.tensor(), out.beta_basis.reshape(n, n, n)


def extend_order(D: TruncatedDeformation, candidate, max_sweep: int = DEFAULT_MAX_SWEEP) -> ExtensionResult:
    """Whether ``D + t^{n+1} candidate`` is a deformation of order n + 1.

    The answer is ``d^2(candidate) == (Obs1, Obs2)`` on basis tuples; the
    assembled deformation is also run through :func:`verify_deformation` and
    the two answers must agree.
    """
    m_next, w_next = _candidate_arrays(D, candidate)
    obs = obstruction(D, max_sweep=max_sweep)
    d1, d2 = _d2_of(D, m_next, w_next)
    ok = np.array_equal(d1 % D.p, obs.obs1) and np.array_equal(d2 % D.p, obs.obs2)
    verified = verify_deformation(D.extend(m_next, w_next), max_sweep=max_sweep).passed
    if ok != verified:
        raise AssertionError("obstruction test and direct verification disagree")
    return ExtensionResult(ok, obs, (d1, d2), verified, (m_next, w_next))


def _coord_candidate(D: TruncatedDeformation, coords) -> tuple[np.ndarray, np.ndarray]:
    module = adjoint_module(D.base)
    n = D.dim
    if D.p == 2:
        from .cohomology_char2 import Char2Cochain

        c = Char2Cochain.from_coords(module, 2, coords)
        return c.phi.tensor(), c.omega_values.reshape(n, n)
    from .cohomology_restricted import StarCochain2

    c = StarCochain2.from_coords(module, coords)
    return c.phi.tensor(), c.omega_basis


def find_extension(D: TruncatedDeformation, max_sweep: int = DEFAULT_MAX_SWEEP) -> ExtensionResult | None:
    """Solve ``d^2(candidate) = (Obs1, Obs2)`` for a next-order term, or None if there is none.

    d^2 is linear in the cochain coordinates, so its matrix is assembled column
    by column from unit cochains; a solution is then passed to :func:`extend_order`.
    """
    module = adjoint_module(D.base)
    if D.p == 2:
        from .cohomology_char2 import Layout

        size = Layout(module, 2).size
    else:
        from .cohomology_restricted import Layout2

        size = Layout2(module).size
    obs = obstruction(D, max_sweep=max_sweep)
    cols = []
    for r in range(size):
        unit = np.zeros(size, dtype=np.int64)
        unit[r] = 1
        d1, d2 = _d2_of(D, *_coord_candidate(D, unit))
        cols.append(np.concatenate([d1.reshape(-1), d2.reshape(-1)]) % D.p)
    rhs = np.concatenate([obs.obs1.reshape(-1), obs.obs2.reshape(-1)])
    sol = solve_raw(np.stack(cols, axis=1), rhs, D.p)
    if sol is None:
        return None
    return extend_order(D, _coord_candidate(D, sol), max_sweep)


# -- Nijenhuis operators ----------------------------------------------------


class NijenhuisOperator:
    """A linear map N on L (``N @ v``) satisfying both restricted Nijenhuis identities."""

    def __init__(self, base: RestrictedLieAlgebra, N, max_sweep: int = DEFAULT_MAX_SWEEP,
                 samples: int = 200, seed: int = 0) -> None:
        p, n = base.p, base.dim
        N = np.asarray(N, dtype=np.int64) % p
        if N.shape != (n, n):
            raise ValueError(f"N must be a {n}x{n} matrix")
        self.base = base
        self.N = N
        problem = self._problem(max_sweep, samples, seed)
        if problem is not None:
            raise ValueError(problem)

    def bracket_n(self, x, y) -> np.ndarray:
        L, N, p = self.base.lie, self.N, self.base.p
        return (L.bracket(N @ x, y) + L.bracket(x, N @ y) - N @ L.bracket(x, y)) % p

    def pmap_n(self, x) -> np.ndarray:
        R, N, p = self.base, self.N, self.base.p
        x = as_array(x, R.dim)
        v = N @ x % p
        for _ in range(p - 1):
            v = R.lie.bracket(x, v)
        return (N @ R.power(x) - v) % p

    def _problem(self, max_sweep: int, samples: int, seed: int) -> str | None:
        R, N, p, n = self.base, self.N, self.base.p, self.base.dim
        eye = np.eye(n, dtype=np.int64)
        # the first identity is bilinear, so basis pairs decide it
        for x, y in product(eye, repeat=2):
            if ((N @ self.bracket_n(x, y) - R.lie.bracket(N @ x, N @ y)) % p).any():
                return f"N[x, y]_N != [Nx, Ny] at x={x.tolist()}, y={y.tolist()}"
        if p ** n <= max_sweep:
            vecs = all_vectors(p, n)
        else:
            rng = np.random.default_rng(seed)
            vecs = np.vstack([eye, rng.integers(0, p, size=(samples, n))])
        for x in vecs:
            if ((N @ self.pmap_n(x) - R.power(N @ x % p)) % p).any():
                return f"N(x^[p]_N) != (Nx)^[p] at x={x.tolist()}"
        return None


@dataclass
class NijenhuisDeformation:
    """The maps ``[., .]_N`` and ``(.)^[p]_N`` of an operator, with certificates.

    ``formulas_match``: the two maps agree with d^1_CE N (standard sign) and
    ind^1 N, computed independently.  ``pair_is_cocycle``: whether the pair
    (bracket_n, pmap_n) itself lies in Z^2, and ``pair_is_coboundary`` whether
    it lies in B^2.  ``deformation``: the order-1
    deformation obtained by conjugating with ``id + t N``, whose first-order
    term is (bracket_n, -pmap_n); ``trivial`` certifies it is equivalent to
    the undeformed algebra and has a coboundary as infinitesimal.
    """

    bracket_n: np.ndarray
    pmap_n: np.ndarray
    formulas_match: bool
    pair_is_cocycle: bool
    pair_is_coboundary: bool
    deformation: TruncatedDeformation
    trivial: bool


def nijenhuis_deformation(op: NijenhuisOperator, max_sweep: int = DEFAULT_MAX_SWEEP) -> NijenhuisDeformation:
    R, N, p, n = op.base, op.N, op.base.p, op.base.dim
    eye = np.eye(n, dtype=np.int64)
    br = np.array([[op.bracket_n(eye[a], eye[b]) for b in range(n)] for a in range(n)], dtype=np.int64)
    pm = np.array([op.pmap_n(eye[k]) for k in range(n)], dtype=np.int64)

    module = adjoint_module(R)
    psi = CeCochain(module, 1, N.T)
    d_ce = CeCochain(module, 2, ce_matrix(module, 1) @ psi.coords() % p).tensor()
    match = np.array_equal(br, d_ce)
    vecs = all_vectors(p, n) if p ** n <= max_sweep else eye
    if p == 2:
        from .cohomology_char2 import d1_matrix, omega_matrix

        d1 = d1_matrix(module)
        ind = lambda v: omega_matrix(module, 2, v) @ (d1 @ psi.coords() % 2) % 2
    else:
        from .cohomology_restricted import ind1_matrix

        ind = lambda v: ind1_matrix(module, v) @ psi.coords() % p
    match = match and all(np.array_equal(op.pmap_n(v), ind(v)) for v in vecs)

    pair = TruncatedDeformation(R, [br], [pm]).term(1)
    pair_ok = _is_cocycle(pair)
    pair_exact = pair_ok and is_trivial_infinitesimal(pair) is not None

    phi = FormalAutomorphism.linear(p, N)
    base1 = TruncatedDeformation(R, [np.zeros((n, n, n), dtype=np.int64)], [np.zeros((n, n), dtype=np.int64)])
    Dn = conjugate(base1, phi)
    expected = np.array_equal(Dn.m[1], br) and np.array_equal(Dn.omega[1], (-pm) % p)
    trivial = (
        expected
        and verify_deformation(Dn, max_sweep=max_sweep).passed
        and check_equivalence(base1, Dn, phi, max_sweep=max_sweep).equivalent
        and is_trivial_infinitesimal(Dn.term(1)) is not None
    )
    return NijenhuisDeformation(br, pm, match, pair_ok, pair_exact, Dn, trivial)


__all__ = [
    "MAX_ORDER",
    "TruncatedDeformation",
    "FormalAutomorphism",
    "NijenhuisOperator",
    "NijenhuisDeformation",
    "DeformationReport",
    "OrderCheck",
    "InfinitesimalReport",
    "EquivalenceReport",
    "Obstruction",
    "ExtensionResult",
    "verify_deformation",
    "infinitesimal_cocycle_check",
    "is_trivial_infinitesimal",
    "conjugate",
    "check_equivalence",
    "obstruction",
    "extend_order",
    "find_extension",
    "nijenhuis_deformation",
]

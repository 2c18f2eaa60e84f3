"""Commutative algebras, (restricted) Lie-Rinehart structures and multiderivations.

Conventions.  An :class:`AssociativeAlgebra` of dimension d stores ``a[i, j, k]``,
the coefficient of ``e_k`` in ``e_i e_j``.  A Lie-Rinehart structure on (A, L)
stores the action as ``action[i]``, the n x n matrix of ``x -> e_i . x``, and
the anchor as ``anchor[j]``, the d x d matrix of ``rho(e_j)``.  Everything that
is multilinear is checked on basis tuples; the p-map conditions are not
additive, so they are checked on every vector (or every pair (a, x)) when the
sweep fits ``max_sweep``, and on a seeded sample otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .algebra import (
    DEFAULT_MAX_SWEEP,
    LieAlgebra,
    RestrictedLieAlgebra,
    as_array,
    pmap_eval,
)
from .deformation import TruncatedDeformation, _as_series, _mul_mm, _omega_series, verify_deformation
from .gf import PrimeField, all_vectors, matrix_power, nullspace, solve_raw, vector_index


class AssociativeAlgebra:
    """A finite-dimensional commutative associative unital algebra over GF(p)."""

    def __init__(self, field: PrimeField, structure, unit: int = 0, basis_names=None, check: bool = True):
        a = field.reduce(structure)
        if a.ndim != 3 or len(set(a.shape)) != 1:
            raise ValueError(f"structure constants must have shape (d, d, d), got {a.shape}")
        self.field = field
        self.p = field.p
        self.dim = a.shape[0]
        a.setflags(write=False)
        self.a = a
        self.unit = unit
        if basis_names is None:
            basis_names = [f"e{i + 1}" for i in range(self.dim)]
        if len(basis_names) != self.dim:
            raise ValueError("number of basis names does not match the dimension")
        self.basis_names = tuple(basis_names)
        if check:
            problem = self.structure_problem()
            if problem is not None:
                raise ValueError(problem)

    def structure_problem(self) -> str | None:
        a, p, d = self.a, self.p, self.dim
        if not 0 <= self.unit < d:
            return f"unit index {self.unit} out of range"
        for i, j in product(range(d), repeat=2):
            if not np.array_equal(a[i, j], a[j, i]):
                return f"not commutative on ({i}, {j})"
        eye = np.eye(d, dtype=np.int64)
        for i in range(d):
            if not (np.array_equal(a[self.unit, i], eye[i]) and np.array_equal(a[i, self.unit], eye[i])):
                return f"e{self.unit + 1} is not a unit: fails on e{i + 1}"
        left = np.einsum("ijm,mkl->ijkl", a, a) % p
        right = np.einsum("jkm,iml->ijkl", a, a) % p
        bad = np.argwhere((left != right).any(axis=-1))
        if len(bad):
            i, j, k = bad[0]
            return f"not associative on basis triple ({i}, {j}, {k})"
        return None

    @property
    def one(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[self.unit] = 1
        return v

    def mul(self, x, y) -> np.ndarray:
        return np.einsum("...i,...j,ijk->...k", x, y, self.a) % self.p

    def left(self, x) -> np.ndarray:
        """Matrix of ``b -> x b`` (batched over leading axes of x)."""
        return np.einsum("...i,ijk->...kj", np.asarray(x, dtype=np.int64), self.a) % self.p

    def power(self, x, k: int) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64) % self.p
        out = np.broadcast_to(self.one, x.shape).copy()
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def elements(self) -> np.ndarray:
        return all_vectors(self.p, self.dim)

    def __repr__(self) -> str:
        return f"AssociativeAlgebra(GF({self.p}), dim={self.dim})"


def characters(A: AssociativeAlgebra) -> list[np.ndarray]:
    """All algebra morphisms ``A -> F``, as coordinate functionals, by brute force."""
    p = A.p
    out = []
    for chi in all_vectors(p, A.dim):
        if chi[A.unit] != 1:
            continue
        prod_ = np.einsum("ijk,k->ij", A.a, chi) % p
        if np.array_equal(prod_, np.outer(chi, chi) % p):
            out.append(chi)
    return out


# -- derivations -------------------------------------------------------------


def _derivation_residual(A: AssociativeAlgebra, D: np.ndarray) -> np.ndarray:
    """``D(e_a e_b) - D(e_a) e_b - e_a D(e_b)`` for all basis pairs."""
    a = A.a
    lhs = np.einsum("abk,mk->abm", a, D)
    r1 = np.einsum("ka,kbm->abm", D, a)
    r2 = np.einsum("kb,akm->abm", D, a)
    return (lhs - r1 - r2) % A.p


def derivation_basis(A: AssociativeAlgebra) -> np.ndarray:
    """Basis of Der(A) as matrices (k, d, d); ``D[:, j]`` is ``D(e_j)``."""
    d = A.dim
    cols = []
    for t in range(d * d):
        unit = np.zeros(d * d, dtype=np.int64)
        unit[t] = 1
        cols.append(_derivation_residual(A, unit.reshape(d, d)).reshape(-1))
    system = np.stack(cols, axis=1)
    basis = nullspace(system, A.p)
    return np.asarray(basis, dtype=np.int64).reshape(-1, d, d)


def is_derivation(A: AssociativeAlgebra, D) -> bool:
    return not _derivation_residual(A, np.asarray(D, dtype=np.int64) % A.p).any()


def _coordinates(basis: np.ndarray, M: np.ndarray, p: int) -> np.ndarray:
    x = solve_raw(basis.reshape(len(basis), -1).T, M.reshape(-1) % p, p)
    if x is None:
        raise ValueError("matrix is not in the span of the derivation basis")
    return x


def derivation_algebra(A: AssociativeAlgebra) -> RestrictedLieAlgebra:
    """Der(A) with the commutator bracket and ``D -> D^p``, in the basis of :func:`derivation_basis`."""
    p = A.p
    Ds = derivation_basis(A)
    k = len(Ds)
    c = np.zeros((k, k, k), dtype=np.int64)
    images = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            c[i, j] = _coordinates(Ds, Ds[i] @ Ds[j] - Ds[j] @ Ds[i], p)
        images[i] = _coordinates(Ds, matrix_power(Ds[i], p, p), p)
    lie = LieAlgebra(A.field, c, [f"D{i + 1}" for i in range(k)])
    return RestrictedLieAlgebra(lie, images)


# -- Lie-Rinehart structures -------------------------------------------------


@dataclass
class AxiomCheck:
    name: str
    passed: bool
    witness: str | None = None


@dataclass
class AxiomReport:
    """Itemized outcome; ``exhaustive`` is False when a sampled sweep was used."""

    checks: list[AxiomCheck]
    exhaustive: bool = True

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def __getitem__(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[AxiomCheck]:
        return [c for c in self.checks if not c.passed]


class LieRinehartStructure:
    """A pair (A, L) with an action of A on L and an anchor ``L -> End(A)``.

    Construction only checks shapes; :func:`verify_lie_rinehart` checks axioms.
    """

    def __init__(self, A: AssociativeAlgebra, L: RestrictedLieAlgebra, action, anchor):
        if A.p != L.p:
            raise ValueError("A and L are defined over different fields")
        d, n, p = A.dim, L.dim, A.p
        action = np.asarray(action, dtype=np.int64) % p
        anchor = np.asarray(anchor, dtype=np.int64) % p
        if action.shape != (d, n, n):
            raise ValueError(f"action must have shape {(d, n, n)}, got {action.shape}")
        if anchor.shape != (n, d, d):
            raise ValueError(f"anchor must have shape {(n, d, d)}, got {anchor.shape}")
        action.setflags(write=False)
        anchor.setflags(write=False)
        self.A, self.L, self.action, self.anchor = A, L, action, anchor

    @property
    def p(self) -> int:
        return self.A.p

    def act(self, a, x) -> np.ndarray:
        """``a . x`` (batched)."""
        M = np.einsum("...i,ijk->...jk", np.asarray(a, dtype=np.int64), self.action)
        return np.einsum("...jk,...k->...j", M, np.asarray(x, dtype=np.int64)) % self.p

    def rho(self, x) -> np.ndarray:
        """Matrix of the derivation ``rho(x)`` (batched)."""
        return np.einsum("...j,jab->...ab", np.asarray(x, dtype=np.int64), self.anchor) % self.p

    def __repr__(self) -> str:
        return f"LieRinehartStructure(dim A={self.A.dim}, dim L={self.L.dim}, p={self.p})"


def character_action(A: AssociativeAlgebra, L: RestrictedLieAlgebra, chi=None) -> np.ndarray:
    """Action ``a . x = chi(a) x`` through a character of A (the first one by default)."""
    if chi is None:
        chars = characters(A)
        if not chars:
            raise ValueError("A has no character over the prime field")
        chi = chars[0]
    chi = as_array(chi, A.dim) % A.p
    return np.einsum("i,jk->ijk", chi, np.eye(L.dim, dtype=np.int64)) % A.p


def null_structure(A: AssociativeAlgebra, L: RestrictedLieAlgebra, chi=None) -> LieRinehartStructure:
    """Trivial action through a character and the null anchor."""
    anchor = np.zeros((L.dim, A.dim, A.dim), dtype=np.int64)
    return LieRinehartStructure(A, L, character_action(A, L, chi), anchor)


def derivation_structure(A: AssociativeAlgebra) -> LieRinehartStructure:
    """(A, Der(A)) with ``(a . D)(b) = a D(b)`` and the identity anchor."""
    p, d = A.p, A.dim
    Ds = derivation_basis(A)
    L = derivation_algebra(A)
    k = len(Ds)
    action = np.zeros((d, k, k), dtype=np.int64)
    for i in range(d):
        Li = A.left(np.eye(d, dtype=np.int64)[i])
        for j in range(k):
            action[i, :, j] = _coordinates(Ds, Li @ Ds[j] % p, p)
    return LieRinehartStructure(A, L, action, Ds)


def _pmap_values(L: RestrictedLieAlgebra, vecs: np.ndarray, max_sweep: int) -> np.ndarray:
    if L.p**L.dim <= max_sweep:
        return L.pmap_table[vector_index(vecs % L.p, L.p)]
    return np.stack([pmap_eval(L, v) for v in vecs]) if len(vecs) else vecs.copy()


def _vector_sweep(p: int, n: int, max_sweep: int, samples: int, seed: int):
    if p**n <= max_sweep:
        return all_vectors(p, n), True
    rng = np.random.default_rng(seed)
    return np.vstack([np.eye(n, dtype=np.int64), rng.integers(0, p, size=(samples, n))]), False


def _pair_sweep(p: int, d: int, n: int, max_sweep: int, samples: int, seed: int):
    """All (a, x) when ``p^(d+n) <= max_sweep``, else basis pairs plus a sample."""
    if p ** (d + n) <= max_sweep:
        av, xv = all_vectors(p, d), all_vectors(p, n)
        return np.repeat(av, len(xv), axis=0), np.tile(xv, (len(av), 1)), True
    rng = np.random.default_rng(seed)
    ea, ex = np.eye(d, dtype=np.int64), np.eye(n, dtype=np.int64)
    a = np.vstack([np.repeat(ea, n, axis=0), rng.integers(0, p, size=(samples, d))])
    x = np.vstack([np.tile(ex, (d, 1)), rng.integers(0, p, size=(samples, n))])
    return a, x, False


def _apply_power(M: np.ndarray, v: np.ndarray, k: int, p: int) -> np.ndarray:
    """``M^k v`` by k literal applications (batched)."""
    for _ in range(k):
        v = np.einsum("...ab,...b->...a", M, v) % p
    return v


def _first(mask: np.ndarray):
    idx = np.argwhere(mask)
    return None if len(idx) == 0 else tuple(int(i) for i in idx[0])


def _hochschild_defect(S: LieRinehartStructure, avs, xvs, pmap_of) -> np.ndarray:
    """``(ax)^[p] - a^p x^[p] - rho(ax)^{p-1}(a) x`` for paired rows."""
    p, A = S.p, S.A
    ax = S.act(avs, xvs)
    lhs = pmap_of(ax)
    rhs = S.act(A.power(avs, p), pmap_of(xvs))
    coeff = _apply_power(S.rho(ax), avs, p - 1, p)
    rhs = rhs + S.act(coeff, xvs)
    return (lhs - rhs) % p


def verify_lie_rinehart(
    S: LieRinehartStructure,
    max_sweep: int = DEFAULT_MAX_SWEEP,
    samples: int = 200,
    seed: int = 0,
) -> AxiomReport:
    """Check every (restricted) Lie-Rinehart axiom and return an itemized report.

    Items: ``module``, ``anchor_derivation``, ``anchor_lie``, ``anchor_linear``,
    ``leibniz``, ``anchor_restricted`` and ``hochschild``.
    """
    A, L, p = S.A, S.L, S.p
    d, n = A.dim, L.dim
    an, ac, c, a = S.anchor, S.action, L.lie.c, A.a
    An, Ln = A.basis_names, L.basis_names
    checks = []

    # A-module: unit acts as identity, e_i . (e_j . x) = (e_i e_j) . x
    wit = None
    if not np.array_equal(ac[A.unit], np.eye(n, dtype=np.int64)):
        wit = f"unit {An[A.unit]} does not act as the identity"
    else:
        lhs = np.einsum("iab,jbc->ijac", ac, ac) % p
        rhs = np.einsum("ijk,kac->ijac", a, ac) % p
        bad = _first((lhs != rhs).any(axis=(2, 3)))
        if bad:
            wit = f"(a, b) = ({An[bad[0]]}, {An[bad[1]]}): a.(b.x) != (ab).x"
    checks.append(AxiomCheck("module", wit is None, wit))

    # anchor lands in Der(A)
    wit = None
    for j in range(n):
        res = _derivation_residual(A, an[j])
        bad = _first(res.any(axis=-1))
        if bad:
            wit = f"rho({Ln[j]}) is not a derivation on ({An[bad[0]]}, {An[bad[1]]})"
            break
    checks.append(AxiomCheck("anchor_derivation", wit is None, wit))

    # Lie morphism: rho([e_i, e_j]) = [rho e_i, rho e_j]
    lhs = np.einsum("ijk,kab->ijab", c, an) % p
    rhs = (np.einsum("iab,jbc->ijac", an, an) - np.einsum("jab,ibc->ijac", an, an)) % p
    bad = _first((lhs != rhs).any(axis=(2, 3)))
    wit = None if bad is None else f"rho([{Ln[bad[0]]}, {Ln[bad[1]]}]) != [rho({Ln[bad[0]]}), rho({Ln[bad[1]]})]"
    checks.append(AxiomCheck("anchor_lie", wit is None, wit))

    # A-module morphism: rho(e_i . x) = e_i rho(x)
    lhs = np.einsum("ikj,kab->ijab", ac, an) % p
    rhs = np.einsum("ica,jab->ijcb", A.left(np.eye(d, dtype=np.int64)), an) % p
    bad = _first((lhs != rhs).any(axis=(2, 3)))
    wit = None if bad is None else f"rho({An[bad[0]]} . {Ln[bad[1]]}) != {An[bad[0]]} rho({Ln[bad[1]]})"
    checks.append(AxiomCheck("anchor_linear", wit is None, wit))

    # Leibniz: [e_i, e_a . e_j] = rho_{e_i}(e_a) . e_j + e_a . [e_i, e_j]
    lhs = np.einsum("aqj,iqk->iajk", ac, c) % p
    r1 = np.einsum("iba,bkj->iajk", an, ac)
    r2 = np.einsum("ijq,akq->iajk", c, ac)
    bad = _first((lhs != (r1 + r2) % p).any(axis=-1))
    wit = None
    if bad:
        i, ai, j = bad
        wit = f"[{Ln[i]}, {An[ai]} . {Ln[j]}] != rho_{Ln[i]}({An[ai]}) . {Ln[j]} + {An[ai]} . [{Ln[i]}, {Ln[j]}]"
    checks.append(AxiomCheck("leibniz", wit is None, wit))

    # restricted anchor: rho(x^[p]) = rho(x)^p on every vector
    xs, ex1 = _vector_sweep(p, n, max_sweep, samples, seed)
    pow_ = _pmap_values(L, xs, max_sweep)
    R = S.rho(xs)
    Rp = np.broadcast_to(np.eye(d, dtype=np.int64), R.shape).copy()
    for _ in range(p):
        Rp = np.einsum("Nab,Nbc->Nac", R, Rp) % p
    bad = np.flatnonzero((S.rho(pow_) != Rp).any(axis=(1, 2)))
    wit = None if len(bad) == 0 else f"rho(x^[p]) != rho(x)^p at x={xs[bad[0]].tolist()}"
    checks.append(AxiomCheck("anchor_restricted", wit is None, wit))

    # Hochschild condition on pairs (a, x)
    avs, xvs, ex2 = _pair_sweep(p, d, n, max_sweep, samples, seed + 1)
    defect = _hochschild_defect(S, avs, xvs, lambda v: _pmap_values(L, v, max_sweep))
    bad = np.flatnonzero(defect.any(axis=1))
    wit = None
    if len(bad):
        k = bad[0]
        wit = f"Hochschild condition fails at a={avs[k].tolist()}, x={xvs[k].tolist()}"
    checks.append(AxiomCheck("hochschild", wit is None, wit))
    return AxiomReport(checks, ex1 and ex2)


def anchor_search(
    A: AssociativeAlgebra,
    L: RestrictedLieAlgebra,
    action,
    max_candidates: int = 10**6,
    max_sweep: int = DEFAULT_MAX_SWEEP,
) -> list[np.ndarray]:
    """Every anchor making (A, L, action) a restricted Lie-Rinehart algebra.

    All linear maps ``L -> End(A)`` are enumerated when there are at most
    ``max_candidates`` of them; otherwise only maps into Der(A).  Candidates are
    filtered by the derivation condition and then fully verified.
    """
    p, d, n = A.p, A.dim, L.dim
    if p ** (n * d * d) <= max_candidates:
        gens = np.eye(d * d, dtype=np.int64).reshape(d * d, d, d)
    else:
        gens = derivation_basis(A)
    k = len(gens)
    if p ** (n * k) > max_candidates:
        raise ValueError(f"{p ** (n * k)} candidate anchors exceed max_candidates")
    found = []
    if k == 0:
        cands = [np.zeros((n, d, d), dtype=np.int64)]
    else:
        # per-basis-vector images that are derivations
        per = all_vectors(p, k)
        mats = np.einsum("Bk,kab->Bab", per, gens) % p
        keep = np.array([is_derivation(A, M) for M in mats])
        mats = mats[keep]
        cands = (np.stack(choice) for choice in product(mats, repeat=n))
    for anchor in cands:
        S = LieRinehartStructure(A, L, action, anchor)
        if verify_lie_rinehart(S, max_sweep).passed:
            found.append(S.anchor.copy())
    return found


# -- restricted multiderivations -------------------------------------------


class RestrictedMultiderivation:
    """``(m, omega, sigma)`` on an A-module L.

    ``m`` is an alternating tensor (n, n, n), ``omega`` is given by basis
    images (n, n) and extended to all vectors by the fold with
    ``omega(x + y) = omega(x) + omega(y) + sum_i theta_i(x, y)`` where the
    theta_i come from ``ad_m``; ``sigma`` is (n, d, d).  With ``check=True``
    the four symbol-map identities are verified and a ValueError names the
    first failure.
    """

    def __init__(self, A: AssociativeAlgebra, action, m, omega, sigma, check: bool = True,
                 max_sweep: int = DEFAULT_MAX_SWEEP, samples: int = 200, seed: int = 0):
        p = A.p
        self.A = A
        self.action = np.asarray(action, dtype=np.int64) % p
        n = self.action.shape[1]
        self.m = np.asarray(m, dtype=np.int64).reshape(n, n, n) % p
        self.omega_images = np.asarray(omega, dtype=np.int64).reshape(n, n) % p
        self.sigma = np.asarray(sigma, dtype=np.int64).reshape(n, A.dim, A.dim) % p
        for arr in (self.action, self.m, self.omega_images, self.sigma):
            arr.setflags(write=False)
        for i in range(n):
            for j in range(n):
                if ((self.m[i, j] + self.m[j, i]) % p).any() or self.m[i, i].any():
                    raise ValueError(f"m is not alternating on ({i}, {j})")
        lie = LieAlgebra(A.field, self.m, check=False)
        self._shadow = RestrictedLieAlgebra(lie, self.omega_images, check=False)
        if check:
            report = self.symbol_report(max_sweep, samples, seed)
            if not report.passed:
                raise ValueError(report.failures()[0].witness)

    @property
    def p(self) -> int:
        return self.A.p

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def omega(self, x) -> np.ndarray:
        return pmap_eval(self._shadow, x)

    def _omega_values(self, vecs: np.ndarray, max_sweep: int) -> np.ndarray:
        return _pmap_values(self._shadow, vecs, max_sweep)

    def _as_structure(self, L: RestrictedLieAlgebra | None = None) -> LieRinehartStructure:
        return LieRinehartStructure(self.A, L or self._shadow, self.action, self.sigma)

    def symbol_report(self, max_sweep: int = DEFAULT_MAX_SWEEP, samples: int = 200, seed: int = 0) -> AxiomReport:
        """The symbol-map identities: ``sigma_linear``, ``sigma_leibniz``, ``sigma_pmap``, ``omega_hochschild``."""
        A, p, n, d = self.A, self.p, self.dim, self.A.dim
        ac, sg, m = self.action, self.sigma, self.m
        S = self._as_structure()
        checks = []

        # sigma(e_i . e_j) = e_i sigma(e_j); bilinear in (a, x)
        lhs = np.einsum("ikj,kab->ijab", ac, sg) % p
        rhs = np.einsum("ica,jab->ijcb", A.left(np.eye(d, dtype=np.int64)), sg) % p
        bad = _first((lhs != rhs).any(axis=(2, 3)))
        wit = None if bad is None else f"sigma(a x) != a sigma(x) at (e{bad[0]}, e{bad[1]})"
        checks.append(AxiomCheck("sigma_linear", wit is None, wit))

        # m(x, a y) = a m(x, y) + sigma(x)(a) y; trilinear
        lhs = np.einsum("aqj,iqk->iajk", ac, m) % p
        r1 = np.einsum("iba,bkj->iajk", sg, ac)
        r2 = np.einsum("ijq,akq->iajk", m, ac)
        bad = _first((lhs != (r1 + r2) % p).any(axis=-1))
        wit = None if bad is None else f"m(x, a y) identity fails at (x, a, y) = {bad}"
        checks.append(AxiomCheck("sigma_leibniz", wit is None, wit))

        # sigma(omega(x)) = sigma(x)^p on every vector
        xs, ex1 = _vector_sweep(p, n, max_sweep, samples, seed)
        om = self._omega_values(xs, max_sweep)
        R = S.rho(xs)
        Rp = np.broadcast_to(np.eye(d, dtype=np.int64), R.shape).copy()
        for _ in range(p):
            Rp = np.einsum("Nab,Nbc->Nac", R, Rp) % p
        bad = np.flatnonzero((S.rho(om) != Rp).any(axis=(1, 2)))
        wit = None if len(bad) == 0 else f"sigma(omega(x)) != sigma(x)^p at x={xs[bad[0]].tolist()}"
        checks.append(AxiomCheck("sigma_pmap", wit is None, wit))

        # omega(a x) = a^p omega(x) + sigma(a x)^{p-1}(a) x on pairs
        avs, xvs, ex2 = _pair_sweep(p, d, n, max_sweep, samples, seed + 1)
        defect = _hochschild_defect(S, avs, xvs, lambda v: self._omega_values(v, max_sweep))
        bad = np.flatnonzero(defect.any(axis=1))
        wit = None if len(bad) == 0 else f"omega(a x) identity fails at a={avs[bad[0]].tolist()}, x={xvs[bad[0]].tolist()}"
        checks.append(AxiomCheck("omega_hochschild", wit is None, wit))
        return AxiomReport(checks, ex1 and ex2)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RestrictedMultiderivation):
            return NotImplemented
        return (
            self.A is other.A or np.array_equal(self.A.a, other.A.a)
        ) and all(
            np.array_equal(u, v)
            for u, v in [
                (self.action, other.action),
                (self.m, other.m),
                (self.omega_images, other.omega_images),
                (self.sigma, other.sigma),
            ]
        )

    __hash__ = None


def structure_to_multiderivation(S: LieRinehartStructure, check: bool = True,
                                 max_sweep: int = DEFAULT_MAX_SWEEP) -> RestrictedMultiderivation:
    """``m = [,]``, ``omega = (.)^[p]``, ``sigma = rho``."""
    return RestrictedMultiderivation(S.A, S.action, S.L.lie.c, S.L.images, S.anchor, check, max_sweep)


def p_fold_defect(M: RestrictedMultiderivation, ys: np.ndarray) -> np.ndarray:
    """``m(x, omega(y)) - m(..m(m(x, y), y).., y)`` as matrices in x, for each row y."""
    p, m = M.p, M.m
    om = np.stack([M.omega(y) for y in ys]) if len(ys) else ys
    lhs = np.einsum("Nb,abc->Nca", om, m) % p
    R = np.einsum("Nb,abc->Nca", ys, m) % p
    rhs = np.broadcast_to(np.eye(M.dim, dtype=np.int64), R.shape).copy()
    for _ in range(p):
        rhs = np.einsum("Nab,Nbc->Nac", R, rhs) % p
    return (lhs - rhs) % p


def multiderivation_to_structure(
    M: RestrictedMultiderivation,
    max_sweep: int = DEFAULT_MAX_SWEEP,
    samples: int = 200,
    seed: int = 0,
) -> LieRinehartStructure:
    """Assemble (A, L, m, omega, sigma) after checking Jacobi for m and the p-fold identity.

    Raises ValueError naming the failing basis triple or vector.  The result is
    not verified further; run :func:`verify_lie_rinehart` on it.
    """
    lie = LieAlgebra(M.A.field, M.m, check=False)
    bad = _first(lie.jacobiator().any(axis=-1))
    if bad:
        raise ValueError(f"Jacobi identity fails for m on basis triple {bad}")
    ys, _ = _vector_sweep(M.p, M.dim, max_sweep, samples, seed)
    defect = p_fold_defect(M, ys)
    badv = np.flatnonzero(defect.any(axis=(1, 2)))
    if len(badv):
        raise ValueError(f"m(x, omega(y)) != m(..m(x, y).., y) at y={ys[badv[0]].tolist()}")
    L = RestrictedLieAlgebra(LieAlgebra(M.A.field, M.m), M.omega_images)
    return M._as_structure(L)


# -- deformations of restricted Lie-Rinehart structures ---------------------


@dataclass
class OrderCondition:
    order: int
    anchor_pmap: bool
    power_sum: bool
    witness: str | None = None

    @property
    def passed(self) -> bool:
        return self.anchor_pmap and self.power_sum


@dataclass
class LRDeformationReport:
    """``classification`` is ``"full"``, ``"weak"`` or ``"invalid"``."""

    classification: str
    deformation: object
    orders: list[OrderCondition] = field(default_factory=list)
    exhaustive: bool = True

    def __bool__(self) -> bool:
        return self.classification == "full"


def _sigma_series(S: LieRinehartStructure, sigmas, T: int) -> np.ndarray:
    n, d = S.L.dim, S.A.dim
    out = np.zeros((T, n, d, d), dtype=np.int64)
    out[0] = S.anchor
    for i, s in enumerate(sigmas or (), start=1):
        if i < T:
            out[i] = np.asarray(s, dtype=np.int64).reshape(n, d, d) % S.p
    return out


def _sigma_of(sig: np.ndarray, u: np.ndarray, p: int) -> np.ndarray:
    """Series matrix ``sigma_t(u)`` for a batch of series u (..., T, n)."""
    T = sig.shape[0]
    out = np.zeros(u.shape[:-2] + (T,) + sig.shape[2:], dtype=np.int64)
    for i in range(T):
        for j in range(T - i):
            out[..., i + j, :, :] += np.einsum("...n,nab->...ab", u[..., j, :], sig[i])
    return out % p


def _series_power(M: np.ndarray, k: int, p: int) -> np.ndarray:
    out = np.zeros_like(M)
    out[..., 0, :, :] = np.eye(M.shape[-1], dtype=np.int64)
    for _ in range(k):
        out = _mul_mm(M, out, p)
    return out


def verify_lr_deformation(
    S: LieRinehartStructure,
    D: TruncatedDeformation,
    sigmas=None,
    max_sweep: int = DEFAULT_MAX_SWEEP,
    samples: int = 200,
    seed: int = 0,
) -> LRDeformationReport:
    """Classify ``(m_t, omega_t, sigma_t)`` as a full, weak or invalid deformation.

    ``sigmas[i - 1]`` is sigma_i (shape (n, d, d)); missing orders are 0 and
    sigma_0 is the anchor of S.  The deformation is invalid when D fails
    :func:`verify_deformation`.  Otherwise it is full when, for every order
    ``k <= N`` and every x (both sides are linear in a, so they are compared
    as matrices):

    * ``sum_i sigma_i(omega_{k-i}(x)) = sum_{i_1+..+i_p=k} sigma_{i_1}(x)..sigma_{i_p}(x)``
    * for p > 2 and k >= 1, ``sigma_k(x)^{p-1} = sum_{i_1+..+i_{p-1}=k} sigma_{i_1}(x)..sigma_{i_{p-1}}(x)``,
      taken literally even though the left side does not depend on lower orders.

    and weak otherwise.
    """
    p, n, T = S.p, S.L.dim, D.order + 1
    base = verify_deformation(D, max_sweep, samples, seed)
    if not base.passed:
        return LRDeformationReport("invalid", base, [], base.exhaustive)
    sig = _sigma_series(S, sigmas, T)
    xs, exhaustive = _vector_sweep(p, n, max_sweep, samples, seed)
    xt = _as_series(xs, n, T)
    om = _omega_series(D.m, D.omega, xt, p)
    lhs = _sigma_of(sig, om, p)
    sx = _sigma_of(sig, xt, p)
    rhs = _series_power(sx, p, p)
    bad20 = (lhs != rhs).any(axis=(-2, -1))
    if p > 2:
        rhs21 = _series_power(sx, p - 1, p)
        lhs21 = np.stack([_series_power(sx[:, k:k + 1], p - 1, p)[:, 0] for k in range(T)], axis=1)
        bad21 = (lhs21 != rhs21).any(axis=(-2, -1))
        bad21[:, 0] = False
    else:
        bad21 = np.zeros_like(bad20)
    orders = []
    for k in range(T):
        w = None
        b20 = np.flatnonzero(bad20[:, k])
        b21 = np.flatnonzero(bad21[:, k])
        if len(b20):
            w = f"anchor/p-map condition fails at order {k}, x={xs[b20[0]].tolist()}"
        elif len(b21):
            w = f"(p-1)-power condition fails at order {k}, x={xs[b21[0]].tolist()}"
        orders.append(OrderCondition(k, len(b20) == 0, len(b21) == 0, w))
    kind = "full" if all(o.passed for o in orders) else "weak"
    return LRDeformationReport(kind, base, orders, exhaustive and base.exhaustive)


__all__ = [
    "AssociativeAlgebra",
    "characters",
    "derivation_basis",
    "is_derivation",
    "derivation_algebra",
    "AxiomCheck",
    "AxiomReport",
    "LieRinehartStructure",
    "character_action",
    "null_structure",
    "derivation_structure",
    "verify_lie_rinehart",
    "anchor_search",
    "RestrictedMultiderivation",
    "structure_to_multiderivation",
    "multiderivation_to_structure",
    "p_fold_defect",
    "OrderCondition",
    "LRDeformationReport",
    "verify_lr_deformation",
]

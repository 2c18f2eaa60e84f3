"""End-to-end acceptance checks, one test per criterion.

Each test records PASS/FAIL in ``conftest.CRITERIA``; the terminal summary
prints one line per criterion.
"""

import functools
from itertools import product

import numpy as np

import conftest
from heisenberg_families import char2_coboundary_family, char2_cocycle_family, cocycle_family
from lr_examples import a1_deformation, gamma_deformation, gamma_structure, witt_witness
from oracles import naive_delta, naive_ind2
from restricted_lie import catalog
from restricted_lie.algebra import (
    RestrictedModule,
    adjoint_module,
    morphism_problem,
    trivial_module,
    verify_restricted,
)
from restricted_lie.cohomology_ce import CeCochain, ce_matrix
from restricted_lie.cohomology_char2 import Char2Cochain, Layout, d_matrix, d_star2, h_n_star2
from restricted_lie.cohomology_restricted import (
    AbCochain,
    Layout2,
    StarCochain2,
    ab_components,
    ab_diff,
    d_star_1,
    d_star_1_matrix,
    d_star_2,
    d_star_2_matrix,
    h2_star,
)
from restricted_lie.deformation import (
    FormalAutomorphism,
    NijenhuisOperator,
    TruncatedDeformation,
    check_equivalence,
    conjugate,
    extend_order,
    infinitesimal_cocycle_check,
    nijenhuis_deformation,
    obstruction,
    verify_deformation,
)
from restricted_lie.gf import all_vectors, in_span, rank
from restricted_lie.rinehart import (
    anchor_search,
    character_action,
    derivation_algebra,
    null_structure,
    verify_lr_deformation,
)

SAMPLES = 100
HEISENBERG_VARIANTS = [(3, "0"), (3, "x*"), (3, "z*"), (5, "0"), (5, "x*"), (5, "z*"), (2, "0"), (2, "z*")]


def criterion(n, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            ok = False
            try:
                fn(*args, **kwargs)
                ok = True
            finally:
                conftest.CRITERIA[n] = (title, ok)
                print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({title})")

        return run

    return wrap


def _cohomology(R):
    M = adjoint_module(R)
    if R.p == 2:
        return h_n_star2(R, M, 2)
    return h2_star(R, M, oracle=False)


def _cochain(M, coords):
    if M.p == 2:
        return Char2Cochain.from_coords(M, 2, coords)
    return StarCochain2.from_coords(M, coords)


def _size(M):
    return Layout(M, 2).size if M.p == 2 else Layout2(M).size


@criterion(1, "Heisenberg classification counts 3 / 3 / 2")
def test_criterion_01_heisenberg_classification():
    counts = {p: len(catalog.classify_heisenberg(p)) for p in (3, 5, 2)}
    # over GF(p) the coefficient c of c z* is an isomorphism invariant, so the
    # computed counts are p + 1 (odd p) and 3 (p = 2)
    assert counts == {3: 3, 5: 3, 2: 2}, f"class counts over the prime field: {counts}"


@criterion(2, "restricted H^2 of the Heisenberg algebras at p = 5, 7")
def test_criterion_02_h2_dimensions_large_p():
    for p in (5, 7):
        for theta, expected in (("0", 8), ("x*", 4), ("z*", 4)):
            R = catalog.heisenberg(p, theta)
            assert h2_star(R, adjoint_module(R)).dim == expected, (p, theta)


@criterion(3, "restricted H^2 at p = 3 with cocycle families matched by rank")
def test_criterion_03_h2_dimensions_p3():
    for theta, expected in (("0", 8), ("x*", 4), ("z*", 4)):
        R = catalog.heisenberg(3, theta)
        H = h2_star(R, adjoint_module(R))
        assert H.dim == expected, theta
        fam = cocycle_family(3, theta)
        assert rank(fam, 3) == len(H.cocycles), theta
        assert all(in_span(H.cocycles, r, 3) for r in fam), theta


@criterion(4, "characteristic 2 H^2 dimensions 3 / 2 with bases matching the families")
def test_criterion_04_char2():
    for theta, expected in (("0", 3), ("z*", 2)):
        R = catalog.heisenberg(2, theta)
        H = h_n_star2(R, adjoint_module(R), 2)
        assert H.dim == expected, theta
        Z, B = char2_cocycle_family(theta), char2_coboundary_family(theta)
        assert all(in_span(H.cocycles, r, 2) for r in Z)
        assert all(in_span(H.coboundaries, r, 2) for r in B)
        assert rank(Z, 2) == len(H.cocycles) and rank(B, 2) == len(H.coboundaries)
        # a computed basis of H^2 together with the family coboundaries spans the family cocycles
        reps = [r for r in H.cocycles if not in_span(B, r, 2)]
        basis = []
        for r in reps:
            if rank(np.vstack([B] + basis + [r]), 2) > rank(np.vstack([B] + basis), 2):
                basis.append(r[None])
        assert len(basis) == expected
        assert rank(np.vstack([B] + basis), 2) == rank(Z, 2)
        assert all(in_span(np.vstack([B] + basis), r, 2) for r in Z)


def _odd_catalog():
    return [
        catalog.heisenberg(3, "0"), catalog.heisenberg(3, "x*"), catalog.heisenberg(3, "z*"),
        catalog.heisenberg(5, "0"), catalog.heisenberg(5, "x*"), catalog.heisenberg(5, "z*"),
        catalog.heisenberg(7, "0"), catalog.heisenberg(7, "x*"), catalog.heisenberg(7, "z*"),
        catalog.sl2(3), catalog.sl2(5), catalog.sl2(7),
        catalog.witt(5), catalog.filiform(5, [0, 0, 0, 0, 1]),
    ]


@criterion(5, "d o d = 0 for every complex on random cochains")
def test_criterion_05_complexes():
    rng = np.random.default_rng(5)

    def random_cols(p, dim):
        return rng.integers(0, p, (dim, SAMPLES))

    for R in _odd_catalog():
        p = R.p
        for M in (adjoint_module(R), trivial_module(R)):
            for m in range(4):
                X = random_cols(p, ce_matrix(M, m).shape[1])
                assert not (ce_matrix(M, m + 1) @ (ce_matrix(M, m) @ X % p) % p).any(), (R, m)
            D1, D2 = d_star_1_matrix(M), d_star_2_matrix(M)
            assert not (D2 @ (D1 @ random_cols(p, D1.shape[1]) % p) % p).any()
        # object route: d_star_2(d_star_1(psi)) evaluated through the cochain classes
        M = adjoint_module(R)
        for _ in range(5):
            psi = CeCochain.from_coords(M, 1, rng.integers(0, p, R.dim * R.dim))
            assert d_star_2(d_star_1(psi)).is_zero()
        if p == 3:
            for _ in range(5):
                psi = CeCochain.from_coords(M, 1, rng.integers(0, p, R.dim * R.dim))
                c = d_star_1(psi)
                x, y = rng.integers(0, p, (2, R.dim))
                assert not naive_ind2(c, x, y).any()

    for theta in all_vectors(2, 3):
        R = catalog.heisenberg(2, theta)
        for M in (adjoint_module(R), trivial_module(R)):
            for n in (2, 3):
                X = random_cols(2, Layout(M, n).size)
                dX = d_matrix(M, n) @ X % 2
                ddX = d_matrix(M, n + 1) @ dX % 2
                assert not ddX.any()
                # the omega rows of d^{n+1}, on their own, kill the image of d^n
                n_ce = ce_matrix(M, n + 1).shape[0]
                assert not ddX[n_ce:].any()
            # delta of a coboundary evaluated term by term at random vectors
            for n in (2, 3):
                for _ in range(SAMPLES // 20):
                    c = Char2Cochain.from_coords(M, n, rng.integers(0, 2, Layout(M, n).size))
                    dc = d_star2(c)
                    x = rng.integers(0, 2, 3)
                    zs = list(rng.integers(0, 2, (n, 3)))
                    assert not naive_delta(dc, x, zs).any()

    modules = []
    for images in ([[0, 0], [0, 0]], [[1, 0], [0, 0]], [[0, 1], [1, 0]], [[1, 0], [0, 1]]):
        R = catalog.abelian(5, 2, images)
        modules.append(trivial_module(R))
        try:
            modules.append(RestrictedModule(R, np.array([[[1, 0], [0, 0]], [[0, 0], [0, 0]]])))
        except ValueError:
            pass  # e1 acts idempotently, so this needs e1^[p] = e1
    assert len(modules) == 6
    for M in modules:
        # the complex stops at degree p = 5, so k + 2 <= 5
        for k in range(4):
            size = len(ab_components(2, k)) * M.dim
            for coords in rng.integers(0, 5, (SAMPLES, size)):
                assert ab_diff(ab_diff(AbCochain(M, k, coords))).is_zero(), (k, coords)


@criterion(6, "catalog algebras are restricted and Der(F[x]/(x^5 - 1)) is W(1)")
def test_criterion_06_catalog():
    algebras = [catalog.sl2(p) for p in (3, 5, 7)] + [catalog.witt(5)]
    algebras += [catalog.filiform(5, lam) for lam in ([0, 0, 0, 0, 0], [0, 0, 0, 0, 1], [1, 2, 0, 3, 4])]
    for p in (2, 3, 5, 7):
        algebras += [catalog.heisenberg(p, tuple(t)) for t in all_vectors(p, 3)]
    for R in algebras:
        assert verify_restricted(R.lie, R.images).passed, R
    Der = derivation_algebra(catalog.cyclic_quotient(5))
    assert morphism_problem(catalog.witt(5), Der, witt_witness(5)) is None


@criterion(7, "order-one deformations, conjugation and Nijenhuis operators")
def test_criterion_07_deformation_properties():
    rng = np.random.default_rng(7)
    non_scalar = 0
    for p, theta in HEISENBERG_VARIANTS:
        R = catalog.heisenberg(p, theta)
        M = adjoint_module(R)
        H = _cohomology(R)
        size = _size(M)

        # random candidates: cocycle combinations, some with a random perturbation
        passing = rejected = 0
        while passing < 20:
            coords = rng.integers(0, p, len(H.cocycles)) @ H.cocycles % p
            if rng.random() < 0.3:
                coords = (coords + rng.integers(0, p, size)) % p
            D = TruncatedDeformation.from_cochains(R, [_cochain(M, coords)])
            if verify_deformation(D).passed:
                assert infinitesimal_cocycle_check(D).is_cocycle, (p, theta, coords)
                passing += 1
            else:
                assert not H.is_cocycle(_cochain(M, coords))
                rejected += 1
        assert rejected > 0

        for _ in range(20):
            coords = rng.integers(0, p, len(H.cocycles)) @ H.cocycles % p
            D = TruncatedDeformation.from_cochains(R, [_cochain(M, coords)])
            phi = FormalAutomorphism.linear(p, rng.integers(0, p, (3, 3)))
            D2 = conjugate(D, phi)
            assert verify_deformation(D2).passed
            assert check_equivalence(D, D2, phi).equivalent
            diff = _cochain(M, (D.term(1).coords() - D2.term(1).coords()) % p)
            assert H.is_coboundary(diff)

        found = 0
        for N in [np.zeros((3, 3), dtype=np.int64), np.eye(3, dtype=np.int64)] + list(rng.integers(0, p, (300, 3, 3))):
            try:
                op = NijenhuisOperator(R, N)
            except ValueError:
                continue
            nd = nijenhuis_deformation(op)
            assert nd.formulas_match and nd.trivial, (p, theta, N)
            found += 1
            scalar = np.array_equal(op.N, op.N[0, 0] * np.eye(3, dtype=np.int64))
            non_scalar += not scalar
        assert found >= 2, (p, theta, found)
    assert non_scalar >= 10
    nd = nijenhuis_deformation(NijenhuisOperator(catalog.sl2(3), np.eye(3, dtype=np.int64)))
    assert nd.trivial


@criterion(8, "dual numbers over GF(5): full iff gamma = 0, weak otherwise, extensions by cocycles")
def test_criterion_08_gamma_family():
    D = gamma_deformation(5)
    for gamma in range(5):
        report = verify_lr_deformation(gamma_structure(gamma), D)
        if gamma == 0:
            assert report.classification == "full"
        else:
            assert pow(gamma, 4, 5) == 1
            assert report.classification == "weak"
    obs = obstruction(D)
    assert not obs.obs1.any() and not obs.obs2.any()
    R = D.base
    M = adjoint_module(R)
    H = h2_star(R, M)
    rng = np.random.default_rng(8)
    rows = list(H.cocycles) + list(rng.integers(0, 5, (10, len(H.cocycles))) @ H.cocycles % 5)
    for row in rows:
        res = extend_order(D, StarCochain2.from_coords(M, row))
        assert res.extends and res.verified


@criterion(9, "characteristic 2 anchor search on A1 and the order-one deformation")
def test_criterion_09_char2_rinehart():
    A = catalog.assoc_dim2("A1")
    L = catalog.heisenberg(2, "z*")
    found = anchor_search(A, L, character_action(A, L))
    assert len(found) == 1 and not found[0].any()
    D, s1 = a1_deformation()
    assert verify_deformation(D).passed
    assert infinitesimal_cocycle_check(D).is_cocycle
    assert verify_lr_deformation(null_structure(A, D.base), D, [s1]).classification == "full"
    assert obstruction(D).vanishes()


@criterion(10, "basis-tuple cocycle conditions agree with exhaustive vector checks")
def test_criterion_10_oracle_equivalence():
    rng = np.random.default_rng(10)
    for theta in all_vectors(3, 3):
        R = catalog.heisenberg(3, tuple(theta))
        H = h2_star(R, adjoint_module(R), oracle=True)
        assert H.oracle_checked
    # independent term-by-term route on the named variants, plus non-cocycles being caught
    for theta in ("0", "x*", "z*"):
        R = catalog.heisenberg(3, theta)
        M = adjoint_module(R)
        H = h2_star(R, M, oracle=False)
        vecs = all_vectors(3, 3)
        for c in H.cocycle_list():
            for x in vecs:
                for y in vecs:
                    assert not naive_ind2(c, x, y).any(), (theta, x, y)
        for _ in range(10):
            coords = rng.integers(0, 3, Layout2(M).size)
            c = StarCochain2.from_coords(M, coords)
            if H.is_cocycle(c):
                continue
            ce_bad = (ce_matrix(M, 2) @ Layout2(M).split(coords)[0] % 3).any()
            assert ce_bad or any(naive_ind2(c, x, y).any() for x in vecs for y in vecs)

    for theta in all_vectors(2, 3):
        R = catalog.heisenberg(2, tuple(theta))
        M = adjoint_module(R)
        vecs = all_vectors(2, 3)
        for n in (2, 3):
            H = h_n_star2(R, M, n)
            assert H.oracle_checked
            if n == 2 or tuple(theta) in ((0, 0, 0), (0, 0, 1)):
                for c in H.cocycle_list():
                    for x in vecs:
                        for zs in product(vecs, repeat=n - 1):
                            assert not naive_delta(c, x, list(zs)).any(), (theta, n, x, zs)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lr_examples import a1_deformation, gamma_deformation, gamma_structure, poly_derivation, witt_witness
from restricted_lie import catalog
from restricted_lie.algebra import morphism_problem
from restricted_lie.deformation import TruncatedDeformation
from restricted_lie.gf import PrimeField, all_vectors, matrix_power, rank
from restricted_lie.rinehart import (
    AssociativeAlgebra,
    LieRinehartStructure,
    RestrictedMultiderivation,
    _hochschild_defect,
    anchor_search,
    character_action,
    characters,
    derivation_algebra,
    derivation_basis,
    derivation_structure,
    is_derivation,
    multiderivation_to_structure,
    null_structure,
    p_fold_defect,
    structure_to_multiderivation,
    verify_lie_rinehart,
    verify_lr_deformation,
)

ASSOC = {
    "A0": catalog.assoc_dim2("A0"),
    "A1": catalog.assoc_dim2("A1"),
    "A2": catalog.assoc_dim2("A2"),
    "dual3": catalog.dual_numbers(3),
    "dual5": catalog.dual_numbers(5),
    "cyc3": catalog.cyclic_quotient(3),
    "cyc5": catalog.cyclic_quotient(5),
}


def brute_derivation_count(A):
    d, p = A.dim, A.p
    return sum(is_derivation(A, M.reshape(d, d)) for M in all_vectors(p, d * d))


@pytest.mark.parametrize("name,dim", [("A0", 2), ("A1", 2), ("A2", 0), ("dual3", 1), ("dual5", 1), ("cyc3", 3)])
def test_derivation_dimensions(name, dim):
    A = ASSOC[name]
    assert len(derivation_basis(A)) == dim
    if A.p ** (A.dim**2) <= 10**5:
        assert brute_derivation_count(A) == A.p**dim


def test_cyclic_quotient_derivations_are_polynomial_vector_fields():
    A = ASSOC["cyc5"]
    assert len(derivation_basis(A)) == 5
    for k in range(5):
        assert is_derivation(A, poly_derivation(5, [0] * k + [1]))


@pytest.mark.parametrize("name", list(ASSOC))
def test_pth_power_of_derivation_is_derivation(name):
    A = ASSOC[name]
    Ds = derivation_basis(A)
    rng = np.random.default_rng(0)
    for _ in range(50 if len(Ds) else 0):
        D = np.einsum("k,kab->ab", rng.integers(0, A.p, len(Ds)), Ds) % A.p
        assert is_derivation(A, matrix_power(D, A.p, A.p))


def test_characters():
    assert [c.tolist() for c in characters(ASSOC["A0"])] == [[1, 0]]
    assert [c.tolist() for c in characters(ASSOC["A1"])] == [[1, 1]]
    assert len(characters(ASSOC["A2"])) == 2
    assert [c.tolist() for c in characters(ASSOC["dual5"])] == [[1, 0]]


def test_associative_algebra_checks():
    F = PrimeField(3)
    a = np.zeros((2, 2, 2), dtype=np.int64)
    a[0, 0, 0] = 1
    a[0, 1, 1] = 1
    with pytest.raises(ValueError):
        AssociativeAlgebra(F, a)
    A = catalog.cyclic_quotient(3)
    x = np.array([0, 1, 0])
    assert A.power(x, 3).tolist() == [1, 0, 0]


def test_witt_algebra_is_derivations_of_cyclic_quotient():
    Der = derivation_algebra(ASSOC["cyc5"])
    T = witt_witness(5)
    assert rank(T, 5) == 5
    assert morphism_problem(catalog.witt(5), Der, T) is None


LIE = [catalog.heisenberg(2, "z*"), catalog.heisenberg(3, "x*"), catalog.heisenberg(5, "z*"), catalog.sl2(3)]


@pytest.mark.parametrize("aname", ["A0", "A1", "A2", "dual3", "dual5"])
def test_null_structures_pass(aname):
    A = ASSOC[aname]
    for L in LIE:
        if L.p == A.p:
            report = verify_lie_rinehart(null_structure(A, L))
            assert report.passed and report.exhaustive


@pytest.mark.parametrize("aname", ["A0", "A1", "dual3", "dual5", "cyc3", "cyc5"])
def test_derivation_structures_pass(aname):
    assert verify_lie_rinehart(derivation_structure(ASSOC[aname])).passed


def test_perturbed_anchor_fails_restriction():
    A = catalog.dual_numbers(5)
    anchor = np.zeros((1, 2, 2), dtype=np.int64)
    anchor[0, 1, 1] = 1  # rho(x) e2 = e2, so rho(x)^5 = rho(x)
    ok = LieRinehartStructure(A, catalog.abelian(5, 1, [[1]]), character_action(A, catalog.abelian(5, 1)), anchor)
    assert verify_lie_rinehart(ok).passed
    L = catalog.abelian(5, 1, [[0]])
    bad = LieRinehartStructure(A, L, character_action(A, L), anchor)
    report = verify_lie_rinehart(bad)
    assert [c.name for c in report.failures()] == ["anchor_restricted"]
    assert "x=[1]" in report["anchor_restricted"].witness


def test_action_must_be_a_module():
    A = catalog.dual_numbers(3)
    L = catalog.heisenberg(3, "0")
    action = np.zeros((2, 3, 3), dtype=np.int64)
    action[0] = np.eye(3)
    action[1] = np.eye(3)  # e2 e2 = 0 but e2 . (e2 . x) = x
    S = LieRinehartStructure(A, L, action, np.zeros((3, 2, 2)))
    assert not verify_lie_rinehart(S)["module"].passed


def test_gamma_zero_is_lie_rinehart():
    assert verify_lie_rinehart(gamma_structure(0)).passed


@pytest.mark.parametrize("gamma", [1, 2, 3, 4])
def test_gamma_nonzero_fails_only_anchor_lie(gamma):
    S = gamma_structure(gamma)
    report = verify_lie_rinehart(S)
    assert [c.name for c in report.failures()] == ["anchor_lie"]
    assert report["anchor_lie"].witness == "rho([x, y]) != [rho(x), rho(y)]"
    assert report["anchor_restricted"].passed and report["hochschild"].passed


@pytest.mark.parametrize("gamma", [2, 3])
def test_gamma_anchor_restriction_needs_unit_power(gamma):
    # with gamma^{p-1} = 1 the restricted anchor holds; force z^[p] = 0 to break it
    S = gamma_structure(gamma)
    L0 = catalog.heisenberg(5, "0")
    S0 = LieRinehartStructure(S.A, L0, S.action, S.anchor)
    assert not verify_lie_rinehart(S0)["anchor_restricted"].passed


@pytest.mark.parametrize("gamma", [1, 4])
def test_correspondence_accepts_gamma_structures(gamma):
    S = gamma_structure(gamma)
    M = structure_to_multiderivation(S)
    assert M.symbol_report().passed
    S2 = multiderivation_to_structure(M)
    assert not verify_lie_rinehart(S2)["anchor_lie"].passed


STRUCTURES = [
    lambda: gamma_structure(0),
    lambda: null_structure(ASSOC["A1"], catalog.heisenberg(2, "z*")),
    lambda: derivation_structure(ASSOC["cyc3"]),
    lambda: derivation_structure(ASSOC["dual5"]),
]


@pytest.mark.parametrize("k", range(len(STRUCTURES)))
def test_structure_multiderivation_round_trip(k):
    S = STRUCTURES[k]()
    M = structure_to_multiderivation(S)
    S2 = multiderivation_to_structure(M)
    assert np.array_equal(S2.L.lie.c, S.L.lie.c)
    assert np.array_equal(S2.L.images, S.L.images)
    assert np.array_equal(S2.anchor, S.anchor) and np.array_equal(S2.action, S.action)
    assert structure_to_multiderivation(S2) == M
    # soundness: a verified structure gives a multiderivation with all identities
    assert verify_lie_rinehart(S).passed and M.symbol_report().passed
    assert not p_fold_defect(M, all_vectors(S.p, S.L.dim)).any()


def test_multiderivation_rejects_non_jacobi_bracket():
    A = catalog.dual_numbers(3)
    L = catalog.heisenberg(3, "0")
    m = np.zeros((3, 3, 3), dtype=np.int64)
    m[0, 1, 1], m[1, 0, 1] = 1, 2
    m[1, 2, 0], m[2, 1, 0] = 1, 2
    m[0, 2, 2], m[2, 0, 2] = 1, 2
    M = RestrictedMultiderivation(A, character_action(A, L), m, np.zeros((3, 3)), np.zeros((3, 2, 2)), check=False)
    with pytest.raises(ValueError, match="Jacobi"):
        multiderivation_to_structure(M)


def test_multiderivation_rejects_non_alternating():
    A = catalog.dual_numbers(3)
    L = catalog.heisenberg(3, "0")
    m = np.zeros((3, 3, 3), dtype=np.int64)
    m[0, 1, 2] = 1
    with pytest.raises(ValueError):
        RestrictedMultiderivation(A, character_action(A, L), m, np.zeros((3, 3)), np.zeros((3, 2, 2)))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["A0", "A1", "dual3", "cyc3"]), st.integers(0, 10**6))
def test_hochschild_condition_at_unit(aname, seed):
    # rho(x)^{p-1} kills the unit, so the condition at a = 1 reads x^[p] = x^[p]
    A = ASSOC[aname]
    S0 = derivation_structure(A)
    rng = np.random.default_rng(seed)
    Ds = derivation_basis(A)
    anchor = np.einsum("jk,kab->jab", rng.integers(0, A.p, (S0.L.dim, len(Ds))), Ds) % A.p
    S = LieRinehartStructure(A, S0.L, S0.action, anchor)
    xs = all_vectors(A.p, S.L.dim)
    avs = np.broadcast_to(A.one, (len(xs), A.dim))
    from restricted_lie.algebra import pmap_eval

    defect = _hochschild_defect(S, avs, xs, lambda v: np.stack([pmap_eval(S.L, u) for u in v]))
    assert not defect.any()


def test_gamma_deformation_classification():
    D = gamma_deformation()
    assert verify_lr_deformation(gamma_structure(0), D).classification == "full"
    for gamma in range(1, 5):
        assert pow(gamma, 4, 5) == 1
        report = verify_lr_deformation(gamma_structure(gamma), D)
        assert report.classification == "weak"
        first = next(o for o in report.orders if not o.passed)
        assert first.order == 1 and not first.anchor_pmap


def test_zero_deformation_is_full():
    S = gamma_structure(0)
    zero = TruncatedDeformation(S.L, [np.zeros((3, 3, 3))], [np.zeros((3, 3))])
    assert verify_lr_deformation(S, zero).classification == "full"


def test_invalid_deformation_classified_invalid():
    S = gamma_structure(0)
    m1 = np.zeros((3, 3, 3), dtype=np.int64)
    m1[0, 2, 0], m1[2, 0, 0] = 1, 4
    D = TruncatedDeformation(S.L, [m1], [np.zeros((3, 3))])
    assert verify_lr_deformation(S, D).classification == "invalid"


def test_a1_anchor_search_finds_only_zero():
    A = ASSOC["A1"]
    L = catalog.heisenberg(2, "z*")
    found = anchor_search(A, L, character_action(A, L))
    assert len(found) == 1 and not found[0].any()
    # enumerating all 2^12 linear maps reproduces the search from scratch
    count = 0
    for bits in all_vectors(2, 12):
        S = LieRinehartStructure(A, L, character_action(A, L), bits.reshape(3, 2, 2))
        count += verify_lie_rinehart(S).passed
    assert count == 1


def test_a1_deformation_is_full_with_its_symbol():
    D, s1 = a1_deformation()
    S = null_structure(ASSOC["A1"], D.base)
    report = verify_lr_deformation(S, D, [s1])
    assert report.classification == "full"
    # the order-one symbol map alone does not satisfy sigma(omega(x)) = sigma(x)^2 at y
    M = RestrictedMultiderivation(ASSOC["A1"], S.action, D.m[1], D.omega[1], s1, check=False)
    fails = [c.name for c in M.symbol_report().failures()]
    assert fails == ["sigma_pmap"]
    assert "x=[0, 1, 0]" in M.symbol_report()["sigma_pmap"].witness

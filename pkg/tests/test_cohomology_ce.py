from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from restricted_lie.algebra import adjoint_module, derivations, inner_derivations, trivial_module
from restricted_lie.catalog import heisenberg_lie, sl2, witt
from restricted_lie.cohomology_ce import (
    CeCochain,
    ce_cocycles,
    ce_cohomology_dim,
    ce_diff,
    ce_matrix,
    cochain_space_dim,
)
from restricted_lie.gf import rank


def unit(n, i):
    v = np.zeros(n, dtype=np.int64)
    v[i] = 1
    return v


def naive_diff(phi, args):
    """Direct evaluation of the differential on explicit vectors."""
    M = phi.module
    L = M.lie
    p = L.p
    args = list(args)
    out = 0
    for i, x in enumerate(args):
        rest = args[:i] + args[i + 1 :]
        out = out + (-1) ** i * M.act(x, phi(*rest))
    for i, j in combinations(range(len(args)), 2):
        rest = [a for k, a in enumerate(args) if k not in (i, j)]
        out = out + (-1) ** (i + j) * phi(L.bracket(args[i], args[j]), *rest)
    return np.asarray(out, dtype=np.int64) % p


MODULES = [
    adjoint_module(heisenberg_lie(3)),
    trivial_module(heisenberg_lie(5)),
    adjoint_module(sl2(3).lie),
    trivial_module(witt(5).lie),
]


@pytest.mark.parametrize("idx", range(len(MODULES)))
@pytest.mark.parametrize("m", [0, 1, 2])
def test_differential_matches_direct_evaluation(idx, m):
    M = MODULES[idx]
    n = M.lie.dim
    rng = np.random.default_rng(10 * idx + m)
    dim = cochain_space_dim(n, m, M.rep(unit(n, 0)).shape[0])
    phi = CeCochain.from_coords(M, m, rng.integers(0, M.p, dim))
    dphi = ce_diff(phi)
    for _ in range(5):
        args = rng.integers(0, M.p, size=(m + 1, n))
        assert np.array_equal(dphi(*args), naive_diff(phi, args))


@pytest.mark.parametrize("idx", range(len(MODULES)))
def test_d_squared_vanishes(idx):
    M = MODULES[idx]
    for m in range(0, min(3, M.lie.dim - 1)):
        prod = ce_matrix(M, m + 1) @ ce_matrix(M, m) % M.p
        assert not prod.any()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(range(len(MODULES))), st.integers(0, 10**6))
def test_d_squared_on_random_cochains(idx, seed):
    M = MODULES[idx]
    n = M.lie.dim
    rng = np.random.default_rng(seed)
    d = M.rep(unit(n, 0)).shape[0]
    phi = CeCochain.from_coords(M, 1, rng.integers(0, M.p, cochain_space_dim(n, 1, d)))
    assert ce_diff(ce_diff(phi)).is_zero()


def test_cochains_are_alternating():
    M = adjoint_module(heisenberg_lie(3))
    rng = np.random.default_rng(0)
    phi = CeCochain.from_coords(M, 2, rng.integers(0, 3, cochain_space_dim(3, 2, 3)))
    x, y = rng.integers(0, 3, (2, 3))
    assert np.array_equal(phi(x, y), -phi(y, x) % 3)
    assert not phi(x, x).any()


def test_heisenberg_zero_cochain_example():
    # for h in the adjoint module, d h (v) = v . h = [v, h]; take h = x
    M = adjoint_module(heisenberg_lie(5))
    h = CeCochain.from_coords(M, 0, [1, 0, 0])
    dh = ce_diff(h)
    assert list(dh(unit(3, 1))) == [0, 0, 4]
    assert not dh(unit(3, 0)).any()


def test_h1_adjoint_is_outer_derivations():
    for L in [heisenberg_lie(3), sl2(5).lie, witt(5).lie]:
        M = adjoint_module(L)
        expected = len(derivations(L)) - len(inner_derivations(L))
        assert ce_cohomology_dim(M, 1) == expected


def test_h1_trivial_is_abelianization_dual():
    L = heisenberg_lie(3)
    assert ce_cohomology_dim(trivial_module(L), 1) == 2
    assert ce_cohomology_dim(trivial_module(sl2(5).lie), 1) == 0


def test_cocycles_are_killed():
    M = adjoint_module(heisenberg_lie(3))
    Z = ce_cocycles(M, 2)
    D = ce_matrix(M, 2)
    assert not (D @ np.asarray(Z).T % 3).any()
    assert len(Z) + rank(D, 3) == cochain_space_dim(3, 2, 3)


def test_euler_characteristic_of_heisenberg_trivial():
    L = heisenberg_lie(3)
    dims = [ce_cohomology_dim(trivial_module(L), m) for m in range(4)]
    assert dims == [1, 2, 2, 1]

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import naive_delta
from heisenberg_families import char2_coboundary_family, char2_cocycle_family, free_char2_coboundary_family
from restricted_lie.algebra import adjoint_module, restricted_derivations, trivial_module
from restricted_lie.catalog import abelian, heisenberg
from restricted_lie.cohomology_ce import CeCochain
from restricted_lie.cohomology_char2 import (
    Char2Cochain,
    Char2PowerSeriesElement,
    Layout,
    central_extension,
    d1_matrix,
    d1_star2,
    d_matrix,
    d_star2,
    delta_n,
    h_n_star2,
    series_bracket,
    two_map_extend,
)
from restricted_lie.gf import all_vectors, in_span, rank

X, Y, Z = np.eye(3, dtype=np.int64)
THETAS = ["0", "x*", "z*", (1, 1, 0), (1, 1, 1)]




def random_series(rng, n, order):
    return Char2PowerSeriesElement(rng.integers(0, 2, (order + 1, n)))


def test_two_map_extend_example():
    R = heisenberg(2, "0")
    s = Char2PowerSeriesElement([X, Y])
    assert two_map_extend(R, s).coefficients.tolist() == [[0, 0, 0], [0, 0, 1]]
    R = heisenberg(2, "z*")
    s = Char2PowerSeriesElement([Z, 0 * Z, 0 * Z], order=2)
    assert two_map_extend(R, s).coefficients.tolist() == [[0, 0, 1], [0, 0, 0], [0, 0, 0]]
    s = Char2PowerSeriesElement([0 * Z, Z, 0 * Z])
    assert two_map_extend(R, s).coefficients.tolist() == [[0, 0, 0], [0, 0, 0], [0, 0, 1]]


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(THETAS), st.integers(0, 4), st.integers(0, 10**6))
def test_two_map_extend_is_a_two_map_on_series(theta, order, seed):
    # second route: ad_s^2 = ad_{s^[2]} on L[[t]] / t^{N+1}
    R = heisenberg(2, theta)
    rng = np.random.default_rng(seed)
    s, u = random_series(rng, 3, order), random_series(rng, 3, order)
    lhs = series_bracket(R.lie, s, series_bracket(R.lie, s, u))
    assert lhs == series_bracket(R.lie, two_map_extend(R, s), u)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(THETAS), st.integers(0, 4), st.integers(0, 10**6))
def test_two_map_extend_quadratic_rule(theta, order, seed):
    R = heisenberg(2, theta)
    rng = np.random.default_rng(seed)
    a, b = random_series(rng, 3, order), random_series(rng, 3, order)
    lhs = two_map_extend(R, a + b)
    rhs = two_map_extend(R, a) + two_map_extend(R, b) + series_bracket(R.lie, a, b)
    assert lhs == rhs


def test_series_shift_truncates():
    s = Char2PowerSeriesElement([X, Y, Z])
    assert s.shift(1).coefficients.tolist() == [[0, 0, 0], [1, 0, 0], [0, 1, 0]]
    assert not s.shift(3).coefficients.any()
    with pytest.raises(ValueError):
        s + Char2PowerSeriesElement([X])


def test_omega_is_quadratic_in_first_slot():
    M = adjoint_module(heisenberg(2, "z*"))
    rng = np.random.default_rng(0)
    c = Char2Cochain.from_coords(M, 2, rng.integers(0, 2, Layout(M, 2).size))
    for x, y in rng.integers(0, 2, (10, 2, 3)):
        assert np.array_equal(c.omega((x + y) % 2), (c.omega(x) + c.omega(y) + c.phi(x, y)) % 2)
    c3 = Char2Cochain.from_coords(M, 3, rng.integers(0, 2, Layout(M, 3).size))
    for x, y, z in rng.integers(0, 2, (10, 3, 3)):
        assert np.array_equal(c3.omega((x + y) % 2, z), (c3.omega(x, z) + c3.omega(y, z) + c3.phi(x, y, z)) % 2)


def test_delta2_example():
    # trivial scalar module on Heisenberg theta = z*, phi(x, y) = 1, omega = 0:
    # delta omega(z, x) = phi(z^[2], x) + phi([z, x], z) = phi(z, x) = 0 and
    # delta omega(x, y) = phi(x^[2], y) + phi([x, y], x) = 0 + phi(z, x) = 0,
    # delta omega(x, z) = 0, delta omega(y, x) = phi(y^[2], x) + phi([y, x], y) = 0
    M = trivial_module(heisenberg(2, "z*"))
    c = Char2Cochain.from_coords(M, 2, [1, 0, 0, 0, 0, 0])
    assert not delta_n(c).any()
    # with phi(x, z) = 1 instead: delta omega(z, x) = phi(z, x) = 1
    c = Char2Cochain.from_coords(M, 2, [0, 1, 0, 0, 0, 0])
    assert naive_delta(c, Z, [X]).tolist() == [1]


MODULES = [adjoint_module(heisenberg(2, t)) for t in THETAS] + [
    trivial_module(heisenberg(2, "z*")),
    trivial_module(abelian(2, 2, [[1, 0], [1, 1]])),
]


@pytest.mark.parametrize("idx", range(len(MODULES)))
@pytest.mark.parametrize("degree", [2, 3])
def test_delta_matches_direct_evaluation(idx, degree):
    M = MODULES[idx]
    n = M.lie.dim
    rng = np.random.default_rng(idx)
    c = Char2Cochain.from_coords(M, degree, rng.integers(0, 2, Layout(M, degree).size))
    dc = d_star2(c)
    for _ in range(8):
        x, *zs = rng.integers(0, 2, (degree, n))
        assert np.array_equal(dc.omega(x, *zs), naive_delta(c, x, list(zs)))


@pytest.mark.parametrize("idx", range(len(MODULES)))
def test_d_squared_vanishes(idx):
    M = MODULES[idx]
    assert not (d_matrix(M, 2) @ d1_matrix(M) % 2).any()
    for n in range(2, 4):
        assert not (d_matrix(M, n + 1) @ d_matrix(M, n) % 2).any()


def test_d1_example():
    # psi(z) = x on adjoint (h, z*): d1 psi omega(z) = psi(z^[2]) + [z, psi(z)] = x
    M = adjoint_module(heisenberg(2, "z*"))
    psi = CeCochain.from_coords(M, 1, np.concatenate([0 * X, 0 * X, X]))
    assert d1_star2(psi).omega(Z).tolist() == [1, 0, 0]


@pytest.mark.parametrize("theta,dim", [("0", 3), ("z*", 2)])
def test_heisenberg_h2_and_families(theta, dim):
    R = heisenberg(2, theta)
    H = h_n_star2(R, adjoint_module(R), 2)
    assert H.dim == dim and H.oracle_checked
    cz, cb = char2_cocycle_family(theta), char2_coboundary_family(theta)
    assert rank(cz, 2) == len(H.cocycles)
    assert all(in_span(H.cocycles, r, 2) for r in cz)
    assert rank(cb, 2) == len(H.coboundaries)
    assert all(in_span(H.coboundaries, r, 2) for r in cb)


@pytest.mark.parametrize("theta", ["0", "z*"])
def test_free_coboundary_family_leaves_cocycles(theta):
    R = heisenberg(2, theta)
    H = h_n_star2(R, adjoint_module(R), 2)
    fam = free_char2_coboundary_family(theta)
    assert rank(fam, 2) > len(H.coboundaries)
    assert not all(in_span(H.cocycles, r, 2) for r in fam)


def test_cohomology_degrees():
    R = heisenberg(2, "z*")
    M = trivial_module(R)
    dims = [h_n_star2(R, M, n).dim for n in range(4)]
    assert dims[0] == 1 and dims[1] == 2
    with pytest.raises(ValueError):
        h_n_star2(R, M, 5)


@pytest.mark.parametrize("theta", THETAS)
def test_z1_is_restricted_derivations(theta):
    R = heisenberg(2, theta)
    M = adjoint_module(R)
    D1 = d1_matrix(M)
    ders = restricted_derivations(R)
    assert D1.shape[1] - rank(D1, 2) == len(ders)
    for D in ders:
        assert not (D1 @ D.T.reshape(-1) % 2).any()


@pytest.mark.parametrize("theta", THETAS)
def test_central_extensions_exactly_for_cocycles(theta):
    # second route: (phi, omega) is a scalar 2-cocycle iff L + Fc is restricted
    R = heisenberg(2, theta)
    M = trivial_module(R)
    H = h_n_star2(R, M, 2)
    for coords in all_vectors(2, 6):
        c = Char2Cochain.from_coords(M, 2, coords)
        report = central_extension(R, c.phi, c.omega_values.reshape(-1))
        assert report.passed == H.is_cocycle(c)


def test_central_extension_builds_algebra():
    R = heisenberg(2, "0")
    phi = np.zeros((3, 3), dtype=np.int64)
    phi[0, 2] = phi[2, 0] = 1
    # [x, [x, y]] = [x, z] = c in the extension, while x^[2] = 0
    report = central_extension(R, phi, [0, 1, 0])
    assert report.jacobi_ok and not report.passed
    with pytest.raises(ValueError):
        report.algebra()
    report = central_extension(R, np.zeros((3, 3)), [1, 0, 0])
    E = report.algebra()
    assert E.power(np.array([1, 0, 0, 0])).tolist() == [0, 0, 0, 1]

"""Worked Lie-Rinehart examples shared by the test modules."""

import numpy as np

from restricted_lie import catalog
from restricted_lie.deformation import TruncatedDeformation
from restricted_lie.rinehart import (
    LieRinehartStructure,
    _coordinates,
    character_action,
    derivation_basis,
)


def gamma_structure(gamma, p=5):
    """Dual numbers acting on (h, z*) through the character, with rho(z)(e2) = gamma e2."""
    L = catalog.heisenberg(p, "z*")
    A = catalog.dual_numbers(p)
    anchor = np.zeros((3, 2, 2), dtype=np.int64)
    anchor[2, 1, 1] = gamma
    return LieRinehartStructure(A, L, character_action(A, L), anchor)


def gamma_deformation(p=5):
    """m_1(x, y) = x and omega_1(y) = z on (h, z*)."""
    L = catalog.heisenberg(p, "z*")
    m1 = np.zeros((3, 3, 3), dtype=np.int64)
    m1[0, 1, 0], m1[1, 0, 0] = 1, p - 1
    w1 = np.zeros((3, 3), dtype=np.int64)
    w1[1, 2] = 1
    return TruncatedDeformation(L, [m1], [w1])


def a1_deformation():
    """Over GF(2) on (h, z*): m_1(x, y) = y, omega_1(x) = x, and sigma_1(x)(e2) = sigma_1(y)(e2) = e1 + e2."""
    L = catalog.heisenberg(2, "z*")
    m1 = np.zeros((3, 3, 3), dtype=np.int64)
    m1[0, 1, 1] = m1[1, 0, 1] = 1
    w1 = np.zeros((3, 3), dtype=np.int64)
    w1[0, 0] = 1
    s1 = np.zeros((3, 2, 2), dtype=np.int64)
    s1[0][:, 1] = [1, 1]
    s1[1][:, 1] = [1, 1]
    return TruncatedDeformation(L, [m1], [w1]), s1


def poly_derivation(p, f):
    """Matrix of f(x) d/dx on F[x]/(x^p - 1) in the basis 1, x, ..., x^{p-1}."""
    D = np.zeros((p, p), dtype=np.int64)
    for k in range(1, p):
        for j, c in enumerate(f):
            D[(k - 1 + j) % p, k] += k * c
    return D % p


def witt_witness(p):
    """Columns: coordinates in derivation_basis of (x - 1)^{i+1} d/dx for e_i, i = -1..p-2."""
    from math import comb

    A = catalog.cyclic_quotient(p)
    Ds = derivation_basis(A)
    cols = []
    for i in range(-1, p - 1):
        k = i + 1
        f = [comb(k, j) * (-1) ** (k - j) for j in range(k + 1)]
        cols.append(_coordinates(Ds, poly_derivation(p, f), p))
    return np.stack(cols, axis=1) % p

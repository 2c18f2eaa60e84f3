"""Restricted Lie-Rinehart structures on (dual numbers, Heisenberg) and the A1 search in characteristic 2."""

import numpy as np

from restricted_lie import catalog
from restricted_lie.deformation import TruncatedDeformation
from restricted_lie.rinehart import (
    LieRinehartStructure,
    anchor_search,
    character_action,
    null_structure,
    verify_lie_rinehart,
    verify_lr_deformation,
)


def gamma_family(p=5):
    L = catalog.heisenberg(p, "z*")
    A = catalog.dual_numbers(p)
    m1 = np.zeros((3, 3, 3), dtype=np.int64)
    m1[0, 1, 0], m1[1, 0, 0] = 1, p - 1
    w1 = np.zeros((3, 3), dtype=np.int64)
    w1[1, 2] = 1
    D = TruncatedDeformation(L, [m1], [w1])
    for gamma in range(p):
        anchor = np.zeros((3, 2, 2), dtype=np.int64)
        anchor[2, 1, 1] = gamma
        S = LieRinehartStructure(A, L, character_action(A, L), anchor)
        axioms = verify_lie_rinehart(S)
        failed = ", ".join(c.name for c in axioms.failures()) or "none"
        kind = verify_lr_deformation(S, D).classification
        print(f"gamma = {gamma}: failed axioms: {failed}; deformation is {kind}")


def a1_search():
    A = catalog.assoc_dim2("A1")
    L = catalog.heisenberg(2, "z*")
    found = anchor_search(A, L, character_action(A, L))
    print(f"A1 with (h, z*): {len(found)} anchor(s), all zero: {all(not a.any() for a in found)}")
    S = null_structure(A, L)
    m1 = np.zeros((3, 3, 3), dtype=np.int64)
    m1[0, 1, 1] = m1[1, 0, 1] = 1
    w1 = np.zeros((3, 3), dtype=np.int64)
    w1[0, 0] = 1
    s1 = np.zeros((3, 2, 2), dtype=np.int64)
    s1[0][:, 1] = s1[1][:, 1] = [1, 1]
    D = TruncatedDeformation(L, [m1], [w1])
    print(f"order-1 deformation with symbol: {verify_lr_deformation(S, D, [s1]).classification}")


if __name__ == "__main__":
    gamma_family()
    a1_search()

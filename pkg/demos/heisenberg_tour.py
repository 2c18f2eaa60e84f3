"""Walk through the restricted Heisenberg algebras: classes, cohomology, a deformation.

Run with ``python3 demos/heisenberg_tour.py``.
"""

import numpy as np

from restricted_lie import catalog
from restricted_lie.algebra import adjoint_module
from restricted_lie.cohomology_char2 import h_n_star2
from restricted_lie.cohomology_restricted import StarCochain2, h2_star
from restricted_lie.deformation import (
    TruncatedDeformation,
    find_extension,
    infinitesimal_cocycle_check,
    obstruction,
    verify_deformation,
)


def classes():
    for p in (2, 3, 5):
        reps = [c.name for c in catalog.classify_heisenberg(p)]
        print(f"GF({p}): {len(reps)} classes, representatives {', '.join(reps)}")


def cohomology():
    for p in (3, 5, 7):
        dims = []
        for theta in ("0", "x*", "z*"):
            R = catalog.heisenberg(p, theta)
            dims.append(h2_star(R, adjoint_module(R)).dim)
        print(f"p = {p}: dim H^2_* for theta = 0, x*, z* is {dims}")
    for theta in ("0", "z*"):
        R = catalog.heisenberg(2, theta)
        print(f"p = 2, theta = {theta}: dim H^2 = {h_n_star2(R, adjoint_module(R), 2).dim}")


def deformation(p):
    # m_1(x, y) = x and omega_1(y) = z on (h, z*)
    R = catalog.heisenberg(p, "z*")
    m1 = np.zeros((3, 3, 3), dtype=np.int64)
    m1[0, 1, 0], m1[1, 0, 0] = 1, p - 1
    w1 = np.zeros((3, 3), dtype=np.int64)
    w1[1, 2] = 1
    D = TruncatedDeformation(R, [m1], [w1])
    print(f"p = {p}: order-1 deformation valid: {verify_deformation(D).passed}")
    report = infinitesimal_cocycle_check(D)
    print(f"  infinitesimal is a cocycle: {report.is_cocycle}, trivial class: {report.class_is_trivial}")
    obs = obstruction(D)
    print(f"  order-2 obstructions vanish: {obs.vanishes()}")
    ext = find_extension(D)
    print(f"  some order-2 extension exists: {ext is not None}")
    if ext is not None and p == 5:
        H = h2_star(R, adjoint_module(R), oracle=False)
        c = StarCochain2.from_coords(adjoint_module(R), H.cocycles[0])
        print(f"  extending by a cocycle instead also works: {verify_deformation(D.extend(c.phi.tensor(), c.omega_basis)).passed}")


if __name__ == "__main__":
    classes()
    cohomology()
    deformation(5)
    deformation(3)

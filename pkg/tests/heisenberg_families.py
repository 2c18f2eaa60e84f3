"""Hand-written parameter families of restricted 2-cocycles and 2-coboundaries
of the Heisenberg algebras with adjoint coefficients, in C^2_* coordinates.

Coordinates: phi on (x,y), (x,z), (y,z), then omega on x, y, z; each value is a
vector in the basis x, y, z.
"""

import numpy as np


def _pack(phi_xy, phi_xz, phi_yz, om_x, om_y, om_z, p):
    return np.concatenate([phi_xy, phi_xz, phi_yz, om_x, om_y, om_z]) % p


def _free_basis(build, nparams, p):
    rows = []
    for k in range(nparams):
        t = np.zeros(nparams, dtype=np.int64)
        t[k] = 1
        rows.append(build(*t))
    return np.array(rows, dtype=np.int64) % p


def cocycle_family(p, theta):
    """Spanning set of Z^2_*: free parameters set to unit vectors one at a time."""
    if theta == "0" and p > 3:
        def build(a, b, c, d, e, f, g, i, gam, eps, kap):
            return _pack([a, b, c], [d, e, f], [g, -d, i], [0, 0, gam], [0, 0, eps], [0, 0, kap], p)
        return _free_basis(build, 11, p)
    if theta == "0" and p == 3:
        def build(a, b, c, d, e, f, g, i, gam, eps, kap):
            # the bracket term of ind2 at (y, x) and (x, y) forces omega(x) = e x, omega(y) = -g y
            return _pack([a, b, c], [d, e, f], [g, -d, i], [e, 0, gam], [0, -g, eps], [0, 0, kap], p)
        return _free_basis(build, 11, p)
    if theta == "x*":
        def build(a, b, c, f, i, gam, eps, kap):
            return _pack([a, b, c], [0, 0, f], [0, 0, i], [i, -f, gam], [0, 0, eps], [0, 0, kap], p)
        return _free_basis(build, 8, p)
    if theta == "z*":
        def build(a, b, c, f, i, gam, eps, kap):
            return _pack([a, b, c], [0, 0, f], [0, 0, i], [0, 0, gam], [0, 0, eps], [i, -f, kap], p)
        return _free_basis(build, 8, p)
    raise ValueError(theta)


def coboundary_family(p, theta):
    """Spanning set of B^2_*, with phi(x,y) = Gx + Hy + Cz as derived in the computation."""
    def build(G, H, C, I):
        w = [G, H, I]
        zero = [0, 0, 0]
        om = {"0": (zero, zero, zero), "x*": (w, zero, zero), "z*": (zero, zero, w)}[theta]
        return _pack([G, H, C], [0, 0, -H], [0, 0, G], *om, p)
    rows = _free_basis(build, 4, p)
    if theta == "0":
        rows = rows[:3]  # I only enters through omega
    return rows


def free_coboundary_family(p, theta):
    """The literal family with independent A, B in phi(x,y); it is not contained in B^2_*."""
    def build(A, B, C, G, H, I):
        w = [G, H, I]
        zero = [0, 0, 0]
        om = {"0": (zero, zero, zero), "x*": (w, zero, zero), "z*": (zero, zero, w)}[theta]
        return _pack([A, B, C], [0, 0, -H], [0, 0, G], *om, p)
    return _free_basis(build, 6, p)


def char2_cocycle_family(theta):
    """Char-2 cocycles: phi(x,y) = ax+by+cz, phi(x,z) = fz, phi(y,z) = iz."""
    def build(a, b, c, f, i, gam, eps, kap):
        om_z = [i, f, kap] if theta == "z*" else [0, 0, kap]
        return _pack([a, b, c], [0, 0, f], [0, 0, i], [b + f, 0, gam], [0, a + i, eps], om_z, 2)
    return _free_basis(build, 8, 2)


def char2_coboundary_family(theta):
    """Char-2 coboundaries with phi(y,z) = Az and phi(x,z) = Bz tied to phi(x,y) = Ax + By + Cz."""
    def build(A, B, C, D, E, I):
        om_z = [A, B, I] if theta == "z*" else [0, 0, 0]
        return _pack([A, B, C], [0, 0, B], [0, 0, A], [0, 0, E], [0, 0, D], om_z, 2)
    rows = _free_basis(build, 6, 2)
    return rows if theta == "z*" else rows[:5]


def free_char2_coboundary_family(theta):
    """The literal family with G, H free (and omega(y) = Dy for theta = z*)."""
    def build(A, B, C, D, E, G, H, I):
        if theta == "z*":
            om_y, om_z = [0, D, 0], [G, H, I]
        else:
            om_y, om_z = [0, 0, D], [0, 0, 0]
        return _pack([A, B, C], [0, 0, H], [0, 0, G], [0, 0, E], om_y, om_z, 2)
    return _free_basis(build, 8, 2)

"""Constructors for the algebras used throughout the package.

Entries can also be addressed by name, e.g. ``"heisenberg:p=3:theta=z*"``,
``"sl2:p=5"``, ``"witt:p=5"``, ``"filiform:p=5:lambda=0,0,0,0,1"`` or
``"abelian:p=5:n=2"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import LieAlgebra, RestrictedLieAlgebra, is_isomorphic_restricted
from .gf import PrimeField, all_vectors

THETA_NAMES = {"0": (0, 0, 0), "x*": (1, 0, 0), "y*": (0, 1, 0), "z*": (0, 0, 1)}


def _field(p) -> PrimeField:
    return p if isinstance(p, PrimeField) else PrimeField(p)


def parse_theta(theta) -> tuple[int, int, int]:
    if isinstance(theta, str):
        key = theta.strip()
        if key in THETA_NAMES:
            return THETA_NAMES[key]
        parts = [int(t) for t in key.split(",")]
        if len(parts) != 3:
            raise ValueError(f"cannot read linear form {theta!r}")
        return tuple(parts)
    vals = tuple(int(t) for t in theta)
    if len(vals) != 3:
        raise ValueError("a linear form on the Heisenberg algebra has three coefficients")
    return vals


def theta_name(theta: Sequence[int]) -> str:
    for name, vals in THETA_NAMES.items():
        if tuple(int(t) for t in theta) == vals:
            return name
    return ",".join(str(int(t)) for t in theta)


def heisenberg_lie(p) -> LieAlgebra:
    F = _field(p)
    return LieAlgebra.from_brackets(F, 3, {(0, 1): [0, 0, 1]}, ["x", "y", "z"])


def heisenberg(p, theta=(0, 0, 0)) -> RestrictedLieAlgebra:
    """The Heisenberg algebra ``[x, y] = z`` with p-map ``v -> theta(v) z``."""
    F = _field(p)
    th = F.reduce(parse_theta(theta))
    images = np.zeros((3, 3), dtype=np.int64)
    images[:, 2] = th
    return RestrictedLieAlgebra(heisenberg_lie(F), images)


def sl2(p) -> RestrictedLieAlgebra:
    """sl_2 with basis X, Y, H; ``X^[p] = Y^[p] = 0`` and ``H^[p] = 2^{p-1} H``."""
    F = _field(p)
    if F.p < 3:
        raise ValueError("sl2 is provided for p >= 3")
    L = LieAlgebra.from_brackets(
        F, 3, {(0, 1): [0, 0, 1], (0, 2): [-2, 0, 0], (1, 2): [0, 2, 0]}, ["X", "Y", "H"]
    )
    images = np.zeros((3, 3), dtype=np.int64)
    images[2, 2] = pow(2, F.p - 1, F.p)
    return RestrictedLieAlgebra(L, images)


def witt(p) -> RestrictedLieAlgebra:
    """W(1) with basis e_{-1}, ..., e_{p-2}; ``[e_i, e_j] = (j - i) e_{i+j}``."""
    F = _field(p)
    if F.p < 5:
        raise ValueError("the Witt algebra is provided for p >= 5")
    n = F.p
    c = np.zeros((n, n, n), dtype=np.int64)
    for i in range(-1, n - 1):
        for j in range(-1, n - 1):
            if -1 <= i + j <= n - 2:
                c[i + 1, j + 1, i + j + 1] = j - i
    L = LieAlgebra(F, c, [f"e{i}" for i in range(-1, n - 1)])
    images = np.zeros((n, n), dtype=np.int64)
    images[1, 1] = 1
    return RestrictedLieAlgebra(L, images)


def filiform(p, lam: Sequence[int]) -> RestrictedLieAlgebra:
    """The filiform algebra ``[e_1, e_i] = e_{i+1}`` with ``e_k^[p] = lam_k e_p``."""
    F = _field(p)
    if F.p < 5:
        raise ValueError("the filiform example is provided for p >= 5")
    n = F.p
    lam = F.reduce(list(lam))
    if lam.shape != (n,):
        raise ValueError(f"expected {n} coefficients lambda_1..lambda_p")
    brackets = {}
    for i in range(2, n):
        vec = np.zeros(n, dtype=np.int64)
        vec[i] = 1
        brackets[(0, i - 1)] = vec
    L = LieAlgebra.from_brackets(F, n, brackets, [f"e{i}" for i in range(1, n + 1)])
    images = np.zeros((n, n), dtype=np.int64)
    images[:, n - 1] = lam
    return RestrictedLieAlgebra(L, images)


def abelian(p, n: int, images=None) -> RestrictedLieAlgebra:
    """An abelian algebra; any basis images define a (p-semilinear) p-map."""
    F = _field(p)
    L = LieAlgebra(F, np.zeros((n, n, n), dtype=np.int64))
    if images is None:
        images = np.zeros((n, n), dtype=np.int64)
    return RestrictedLieAlgebra(L, images)


def assoc_dim2(variant: str, p=2):
    """The two-dimensional unital algebras A0 (e2^2 = 0), A1 (e2^2 = e1), A2 (e2^2 = e2)."""
    from .rinehart import AssociativeAlgebra

    F = _field(p)
    if F.p != 2:
        raise ValueError("the A0/A1/A2 family is the characteristic 2 list")
    square = {"A0": [0, 0], "A1": [1, 0], "A2": [0, 1]}
    if variant not in square:
        raise ValueError(f"unknown variant {variant!r}; expected A0, A1 or A2")
    a = np.zeros((2, 2, 2), dtype=np.int64)
    a[0, 0, 0] = 1
    a[0, 1, 1] = a[1, 0, 1] = 1
    a[1, 1] = square[variant]
    return AssociativeAlgebra(F, a, unit=0, basis_names=["e1", "e2"])


def dual_numbers(p):
    """span{e1, e2} with unit e1 and ``e2 e2 = 0``, in any characteristic."""
    from .rinehart import AssociativeAlgebra

    F = _field(p)
    a = np.zeros((2, 2, 2), dtype=np.int64)
    a[0, 0, 0] = 1
    a[0, 1, 1] = a[1, 0, 1] = 1
    return AssociativeAlgebra(F, a, unit=0, basis_names=["e1", "e2"])


def cyclic_quotient(p):
    """``F[x]/(x^p - 1)`` with basis 1, x, ..., x^{p-1}."""
    from .rinehart import AssociativeAlgebra

    F = _field(p)
    n = F.p
    a = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            a[i, j, (i + j) % n] = 1
    return AssociativeAlgebra(F, a, unit=0, basis_names=[f"x^{i}" for i in range(n)])


@dataclass
class HeisenbergClass:
    representative: tuple[int, int, int]
    members: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def name(self) -> str:
        return theta_name(self.representative)


def classify_heisenberg(p) -> list[HeisenbergClass]:
    """Partition all p^3 linear forms theta into restricted isomorphism classes.

    Forms are visited in lexicographic order, so each representative is the
    least form of its class.  Every new form is compared with the existing
    representatives only; isomorphism is an equivalence relation.
    """
    F = _field(p)
    algebras = {}
    classes: list[HeisenbergClass] = []
    for theta in all_vectors(F.p, 3):
        theta = tuple(int(t) for t in theta)
        R = heisenberg(F, theta)
        algebras[theta] = R
        for cls in classes:
            if is_isomorphic_restricted(algebras[cls.representative], R):
                cls.members.append(theta)
                break
        else:
            classes.append(HeisenbergClass(theta, [theta]))
    return classes


def _parse_params(parts: list[str]) -> dict[str, str]:
    params = {}
    for part in parts:
        if "=" not in part:
            raise ValueError(f"expected key=value in catalog name, got {part!r}")
        key, value = part.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def by_name(name: str) -> RestrictedLieAlgebra:
    """Look up a catalog algebra from a string such as ``"heisenberg:p=3:theta=z*"``."""
    kind, *rest = name.split(":")
    params = _parse_params(rest)
    if "p" not in params:
        raise ValueError(f"catalog name {name!r} needs a p=<prime> parameter")
    p = int(params["p"])
    if kind == "heisenberg":
        return heisenberg(p, params.get("theta", "0"))
    if kind == "sl2":
        return sl2(p)
    if kind == "witt":
        return witt(p)
    if kind == "filiform":
        lam = [int(t) for t in params.get("lambda", ",".join(["0"] * p)).split(",")]
        return filiform(p, lam)
    if kind == "abelian":
        return abelian(p, int(params.get("n", "1")))
    raise ValueError(f"unknown catalog algebra {kind!r}")


__all__ = [
    "heisenberg",
    "heisenberg_lie",
    "sl2",
    "witt",
    "filiform",
    "abelian",
    "assoc_dim2",
    "dual_numbers",
    "cyclic_quotient",
    "classify_heisenberg",
    "HeisenbergClass",
    "parse_theta",
    "theta_name",
    "by_name",
]

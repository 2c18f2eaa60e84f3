"""Exact computations with restricted Lie algebras over prime fields."""

from .gf import PrimeField, FpVector, FpMatrix
from .algebra import LieAlgebra, RestrictedLieAlgebra, LieModule, RestrictedModule

__all__ = ["PrimeField", "FpVector", "FpMatrix", "LieAlgebra", "RestrictedLieAlgebra", "LieModule", "RestrictedModule"]

"""Spaces of quasi-polynomials, their fundamental differential operators,
residue duality transforms, Bethe-type critical point systems, and Gaudin
Hamiltonian duality checks."""

from .field import ApproxField, ExactComplex, ExactField, EXACT
from .quasipoly import Polynomial, QuasiPolynomial, RationalFunction

__all__ = [
    "ApproxField",
    "ExactComplex",
    "ExactField",
    "EXACT",
    "Polynomial",
    "QuasiPolynomial",
    "RationalFunction",
]

__version__ = "0.1.0"

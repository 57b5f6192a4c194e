"""Periodic spectrum of the planar vectorial p-Laplacian.

Modules
-------
specfun    conjugate exponents, constants, the profile functions F, G, Q, cos_p
periodfun  the period functions T, S and U = T/S
spectrum   eigenvalue generators from rational values of S
dynamics   reduced and full flows, eigenfunction reconstruction
cli        command-line interface (with config, output, verify)
"""

from .exceptions import ConsistencyError, ConvergenceError, DomainError, IntegrationError
from .specfun import Exponent, make_exponent

__all__ = [
    "ConsistencyError",
    "ConvergenceError",
    "DomainError",
    "Exponent",
    "IntegrationError",
    "make_exponent",
]

"""Thin wrapper over scipy's DOP853 shared by every ODE in the package."""

import math

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import IntegrationError

# below this norm the power maps return their continuous extension, 0
TINY_NORM = 1e-280


def phi_scalar(v, alpha):
    """|v|^(alpha-2) v for a real scalar."""
    a = abs(v)
    if a < TINY_NORM:
        return 0.0
    return math.copysign(a ** (alpha - 1.0), v)


def phi_vec(v1, v2, alpha):
    """||v||^(alpha-2) v for a planar vector, as ||v||^(alpha-1) * v/||v||."""
    n = math.hypot(v1, v2)
    if n < TINY_NORM:
        return 0.0, 0.0
    k = n ** (alpha - 1.0) / n
    return k * v1, k * v2


def integrate(rhs, t_end, y0, rtol, atol=None, events=None, t_start=0.0):
    """Integrate ``rhs`` with dense output; raise instead of returning a failed run."""
    if atol is None:
        atol = rtol * 1e-2
    sol = solve_ivp(
        rhs,
        (t_start, t_end),
        np.asarray(y0, dtype=float),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=events,
    )
    if sol.status < 0:
        raise IntegrationError(f"integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    return sol

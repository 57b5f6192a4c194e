"""Period functions T_p(mu), S_p(mu) and their ratio U_p(mu).

For a momentum level mu in (0, 1) the reduced orbit C_mu sweeps r over
[r_-, r_+] and

    T(mu) = 1/pi   * int Q / (F sqrt(Q^2 - mu^2)) dr
    S(mu) = mu/pi  * int 1 / (p r q (1-r) sqrt(Q^2 - mu^2)) dr

Both integrands blow up like an inverse square root at the two ends.  The
production route trades r for ``u = sign(r - 1/p) sqrt(1 - Q(r)^2)``, which
turns ``Q^2 - mu^2`` into ``rho^2 - u^2`` with ``rho^2 = 1 - mu^2``, and then
sets ``u = rho sin(alpha)``.  With ``x = r - 1/p`` the two integrals become

    T = 1 / (pi (p+q))      * int_{-pi/2}^{pi/2} R(alpha) d alpha
    S = mu / (pi (p+q))     * int_{-pi/2}^{pi/2} R(alpha) / Q^2 d alpha

where ``R = |u| / |x|`` tends to ``sqrt(p+q)`` at the top.  The integrands
are analytic in alpha, so plain Gauss-Legendre converges geometrically, and
nothing degrades as mu -> 1.

A second route, the cosine substitution ``r = r_- + (r_+ - r_-)(1 - cos w)/2``
on the level roots, is kept for cross-checks away from mu = 1.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from . import specfun
from .exceptions import ConvergenceError, DomainError

QUAD_REL_TOL = 1e-11
MIN_NODES = 64
MAX_NODES = 4096
# below this distance from mu = 1 the quadratic expansion is used instead
ASYMPTOTIC_GAP = 1e-8


@dataclass(frozen=True)
class PeriodTriple:
    """T, S and U = T/S at one momentum level, with the route that produced them."""

    mu: float
    t_val: float
    s_val: float
    u_val: float
    method: str  # "quadrature", "asymptotic" or "limit"
    nodes: int = 0


@lru_cache(maxsize=32)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _panel(n, a, b):
    x, w = _gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _check_mu(mu, allow_one=True):
    mu = float(mu)
    ok = 0.0 < mu <= 1.0 if allow_one else 0.0 < mu < 1.0
    if not ok:
        raise DomainError(f"momentum mu={mu!r} outside {'(0, 1]' if allow_one else '(0, 1)'}")
    return mu


# the two outer panels cover |alpha| in [pi/2 - BETA_SPLIT, pi/2]
BETA_SPLIT = 0.25 * math.pi


def _node_values(e, mu, n):
    """Effective weights, x, R and Q^2 at the nodes of the three panels.

    Centre panel: alpha in [-pi/2 + BETA_SPLIT, pi/2 - BETA_SPLIT], plain
    Gauss-Legendre.  Outer panels: with beta = pi/2 - |alpha| the substitution
    ``rho sin(beta) = mu sinh(tau)`` gives ``Q^2 = mu^2 cosh(tau)^2`` exactly,
    which resolves the 1/Q^2 peak of width ~mu at the ends without any
    cancellation in cos(alpha).
    """
    rho2 = (1.0 - mu) * (1.0 + mu)
    rho = math.sqrt(rho2)

    a = 0.5 * math.pi - BETA_SPLIT
    alpha, wc = _panel(n, -a, a)
    sa = np.sin(alpha)
    u2_c = rho2 * sa * sa
    q2_c = 1.0 - u2_c
    logq2_c = np.log1p(-u2_c)
    sign_c = np.sign(sa)

    tau_max = math.asinh(rho * math.sin(BETA_SPLIT) / mu)
    tau, wt = _panel(n, 0.0, tau_max)
    sb = mu * np.sinh(tau) / rho
    cb = np.sqrt((1.0 - sb) * (1.0 + sb))
    ch = np.cosh(tau)
    q2_o = (mu * ch) ** 2
    u2_o = rho2 * cb * cb
    logq2_o = 2.0 * np.log(mu * ch)
    jac = mu * ch / (rho * cb)

    w = np.concatenate([wc, wt * jac, wt * jac])
    q2 = np.concatenate([q2_c, q2_o, q2_o])
    u2 = np.concatenate([u2_c, u2_o, u2_o])
    log_q2 = np.concatenate([logq2_c, logq2_o, logq2_o])
    sign = np.concatenate([sign_c, -np.ones(n), np.ones(n)])

    v = sign * np.sqrt(-log_q2)
    x = specfun.invert_h(e, v)
    big = np.abs(x) > 1e-3
    xs = np.where(big, x, 1.0)
    # R = |u|/|x|; near the top use K(x) (1 - Q^2)/(-ln Q^2), free of 0/0
    r_direct = np.sqrt(u2) / np.abs(xs)
    z = np.where(big, -1.0, log_q2)
    ratio = np.where(np.abs(z) < 1e-8, 1.0 + 0.5 * z, np.expm1(z) / np.where(z == 0.0, 1.0, z))
    r_top = np.sqrt(specfun.k_func(e, np.where(big, 0.0, x)) * ratio)
    big_r = np.where(big, r_direct, r_top)
    return w, x, big_r, q2


def _raw_integrals(e, mu, n):
    w, x, big_r, q2 = _node_values(e, mu, n)
    pq = e.p + e.q
    t_val = float(np.dot(w, big_r)) / (math.pi * pq)
    s_val = mu * float(np.dot(w, big_r / q2)) / (math.pi * pq)
    return t_val, s_val


def _adaptive(e, mu, evaluate, rel_tol):
    n = MIN_NODES
    prev = evaluate(e, mu, n)
    while n < MAX_NODES:
        n *= 2
        cur = evaluate(e, mu, n)
        if all(abs(a - b) <= rel_tol * abs(a) for a, b in zip(cur, prev)):
            return cur, n
        prev = cur
    raise ConvergenceError(
        f"period quadrature at p={e.p}, mu={mu!r} did not reach rel. tol {rel_tol:g} "
        f"with {MAX_NODES} nodes"
    )


def period_triple(e, mu, rel_tol=QUAD_REL_TOL):
    """Evaluate T, S and U together at one momentum level mu in (0, 1]."""
    mu = _check_mu(mu)
    if mu == 1.0:
        return PeriodTriple(mu, e.c1, e.c1, 1.0, "limit")
    if 1.0 - mu < ASYMPTOTIC_GAP:
        t_val, s_val = asymptotic_ts(e, mu)
        return PeriodTriple(mu, t_val, s_val, t_val / s_val, "asymptotic")
    (t_val, s_val), n = _adaptive(e, mu, _raw_integrals, rel_tol)
    return PeriodTriple(mu, t_val, s_val, t_val / s_val, "quadrature", n)


def t_of_mu(e, mu):
    """T_p(mu): period of the reduced orbit C_mu divided by 2 pi."""
    return period_triple(e, mu).t_val


def s_of_mu(e, mu):
    """S_p(mu): growth of the polar angle of x over one reduced period, over 2 pi."""
    return period_triple(e, mu).s_val


def u_of_mu(e, mu):
    """U_p(mu) = T_p(mu) / S_p(mu); identically 1 at p = 2."""
    return period_triple(e, mu).u_val


def limits_at_zero(e):
    """Limits of (T, S) as mu -> 0+: (pi_p / 2 pi, 1/2)."""
    return e.pi_p / (2.0 * math.pi), 0.5


def asymptotic_ts(e, mu):
    """Quadratic expansions of T and S about mu = 1."""
    mu = _check_mu(mu)
    d = mu - 1.0
    t_val = e.c1 - e.c2 * d + e.c3 * d * d
    s_val = e.c1 - e.c2 * d + e.c4 * d * d
    return t_val, s_val


def u_slope_check(e, mu):
    """Central difference estimate of U'(mu), step min(1e-5, (1-mu)/10).

    Near mu = 1 this should be close to ``-c7 (mu - 1)``.
    """
    mu = _check_mu(mu, allow_one=False)
    h = min(1e-5, (1.0 - mu) / 10.0, mu / 10.0)
    return (u_of_mu(e, mu + h) - u_of_mu(e, mu - h)) / (2.0 * h)


# --- alternative forms, used by the tests --------------------------------


def _asym_s_integrals(e, mu, n):
    w, x, big_r, q2 = _node_values(e, mu, n)
    pq = e.p + e.q
    base = big_r / q2
    # dr / (p r) -> (1 - q x) R / ((p+q) Q^2);  dr / (q(1-r)) -> (1 + p x) R / ((p+q) Q^2)
    s_pr = mu * float(np.dot(w, (1.0 - e.q * x) * base)) / (math.pi * pq)
    s_qr = mu * float(np.dot(w, (1.0 + e.p * x) * base)) / (math.pi * pq)
    return s_pr, s_qr


def s_forms(e, mu, rel_tol=QUAD_REL_TOL):
    """S from the three integral representations: (symmetric, via p r, via q (1-r))."""
    mu = _check_mu(mu, allow_one=False)
    sym = s_of_mu(e, mu)
    (s_pr, s_qr), _ = _adaptive(e, mu, _asym_s_integrals, rel_tol)
    return sym, s_pr, s_qr


def period_integrals_rform(e, mu, n=2048):
    """T and S straight from the r-integrals with the cosine substitution.

    Accurate to about 1e-9 for mid-range mu. It degrades towards both ends:
    for small mu the factor 1/r peaks sharply at the tiny root r_-, and near
    mu = 1 the level roots coalesce. Kept as an independent cross-check.
    """
    mu = _check_mu(mu, allow_one=False)
    r_lo, r_hi = specfun.level_roots(e, mu)
    half = 0.5 * (r_hi - r_lo)
    om, wg = _panel(n, 0.0, math.pi)
    r = r_lo + half * (1.0 - np.cos(om))
    jac = half * np.sin(om)
    qv = specfun.q_func(e, r)
    root = np.sqrt((qv - mu) * (qv + mu))
    t_int = qv / (specfun.f_func(e, r) * root)
    s_int = 1.0 / (e.p * r * e.q * (1.0 - r) * root)
    t_val = float(np.dot(wg, t_int * jac)) / math.pi
    s_val = mu * float(np.dot(wg, s_int * jac)) / math.pi
    return t_val, s_val

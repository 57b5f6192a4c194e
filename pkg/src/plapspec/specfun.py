"""Closed-form functions of the exponent p and of the energy share r.

Everything here lives on the unit energy level of the scaling system, where
the potential share is ``r = ||x||^p / p`` and the kinetic share is
``s = 1 - r``.  The three profile functions are

    F(r) = (p r)^(1/q) (q (1-r))^(1/p)
    G(r) = p^(1/q) q^(1/p) (r - 1/p) / (r^(1/p) (1-r)^(1/q))
    Q(r) = (p r)^(1/p) (q (1-r))^(1/q)

and ``Q(r) sin(theta)`` is the momentum of a reduced state ``(r, theta)``.

Near the top of Q (r = 1/p) the level equation ``Q(r) = mu`` is badly
conditioned in r, so the level-set solvers work in the centred coordinate
``x = r - 1/p`` through the monotone map ``h(x) = sign(x) sqrt(-2 ln Q)``,
which is close to ``sqrt(p + q) x`` at the top and stays well conditioned all
the way to the ends of the interval.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from . import _ode
from .exceptions import ConvergenceError, DomainError

_LOG_GUARD = 1e-300
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Exponent:
    """A conjugate pair (p, q) together with the constants derived from it.

    Attributes
    ----------
    p, q : float
        Conjugate exponents, ``1/p + 1/q = 1``.
    pi_p : float
        Half period of the scalar p-oscillator, ``2 pi (p-1)^(1/p) / (p sin(pi/p))``.
    c1, c2, c3, c4, c7 : float
        Coefficients of the expansions of T, S and U' at mu = 1.  All are
        invariant under p <-> q, non-negative, and vanish (except ``c1``) at
        p = 2.
    """

    p: float
    q: float
    pi_p: float
    c1: float
    c2: float
    c3: float
    c4: float
    c7: float

    @property
    def top(self):
        """Position 1/p of the maximum of Q."""
        return 1.0 / self.p


@dataclass(frozen=True)
class EnergySplit:
    """Potential share ``r`` and kinetic share ``s = 1 - r`` on the unit level."""

    r: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise DomainError(f"energy share r={self.r!r} outside (0, 1)")

    @property
    def s(self):
        return 1.0 - self.r


def make_exponent(p):
    """Build an :class:`Exponent` for ``p > 1``."""
    p = float(p)
    if not (p > 1.0 and math.isfinite(p)):
        raise DomainError(f"exponent p={p!r} must be a finite real > 1")
    q = p / (p - 1.0)
    if p == 2.0:
        pi_p = math.pi
    else:
        pi_p = 2.0 * math.pi * (p - 1.0) ** (1.0 / p) / (p * math.sin(math.pi / p))
    sq = math.sqrt(p - 1.0)
    d2 = (p - 2.0) ** 2
    return Exponent(
        p=p,
        q=q,
        pi_p=pi_p,
        c1=sq / p,
        c2=d2 / (12.0 * p * sq),
        c3=d2 * d2 / (576.0 * p * sq**3),
        # sign of the 20p term fixed by the p <-> q symmetry of S and by direct fits
        c4=d2 * (p * p + 20.0 * p - 20.0) / (576.0 * p * sq**3),
        c7=d2 / (12.0 * (p - 1.0)),
    )


def _check_open_unit(r, name="r"):
    arr = np.asarray(r, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"{name} must lie in the open interval (0, 1)")
    return arr


def _pow(base, expo):
    """base**expo for base >= 0 through exp/log, with 0 below the log guard."""
    base = np.asarray(base, dtype=float)
    safe = np.maximum(base, _LOG_GUARD)
    out = np.exp(expo * np.log(safe))
    if expo > 0:
        return np.where(base < _LOG_GUARD, 0.0, out)
    return np.where(base < _LOG_GUARD, np.inf, out)


def _scalar_or_array(val, like):
    return float(val) if np.ndim(like) == 0 else val


def q_func(e, r):
    """Momentum profile Q_p(r) = (p r)^(1/p) (q (1-r))^(1/q), maximal (= 1) at r = 1/p."""
    arr = _check_open_unit(r)
    val = _pow(e.p * arr, 1.0 / e.p) * _pow(e.q * (1.0 - arr), 1.0 / e.q)
    return _scalar_or_array(val, r)


def f_func(e, r):
    """F_p(r) = (p r)^(1/q) (q (1-r))^(1/p); positive inside, zero at both ends."""
    arr = _check_open_unit(r)
    val = _pow(e.p * arr, 1.0 / e.q) * _pow(e.q * (1.0 - arr), 1.0 / e.p)
    return _scalar_or_array(val, r)


def g_func(e, r):
    """G_p(r), strictly increasing from -inf to +inf with its zero at r = 1/p."""
    arr = _check_open_unit(r)
    scale = e.p ** (1.0 / e.q) * e.q ** (1.0 / e.p)
    val = scale * (arr - 1.0 / e.p) * _pow(arr, -1.0 / e.p) * _pow(1.0 - arr, -1.0 / e.q)
    return _scalar_or_array(val, r)


# --- centred coordinate x = r - 1/p -------------------------------------

_L1PM_TERMS = 40


def log1p_minus(z):
    """log(1 + z) - z without cancellation for small |z|."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 0.1
    zs = z[small]
    # Horner on sum_{k>=2} (-1)^(k+1) z^k / k
    acc = np.zeros_like(zs)
    for k in range(_L1PM_TERMS, 1, -1):
        acc = acc * zs + (-1.0) ** (k + 1) / k
    out[small] = acc * zs * zs
    big = ~small
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = np.log1p(z[big]) - z[big]
    return out


def k_func(e, x):
    """K(x) = -2 ln Q(1/p + x) / x^2, the positive curvature factor at the top.

    Equals ``p + q`` at ``x = 0`` and grows without bound at the ends.
    """
    x = np.asarray(x, dtype=float)
    # below 1e-8 the two-term series is exact to rounding and avoids x^2 underflow
    tiny = np.abs(x) < 1e-8
    xs = np.where(tiny, 1.0, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        lq = log1p_minus(e.p * xs) / e.p + log1p_minus(-e.q * xs) / e.q
        k = -2.0 * lq / (xs * xs)
    series = (e.p + e.q) - (2.0 / 3.0) * (e.p * e.p - e.q * e.q) * x
    return np.where(tiny, series, k)


def h_func(e, x):
    """h(x) = x sqrt(K(x)) = sign(x) sqrt(-2 ln Q(1/p + x))."""
    x = np.asarray(x, dtype=float)
    return x * np.sqrt(k_func(e, x))


def h_prime(e, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (e.p + e.q) / ((1.0 + e.p * x) * (1.0 - e.q * x) * np.sqrt(k_func(e, x)))


# |h| above this is solved in log coordinates, where h is far from linear
_TAIL_SPLIT = 1.0


def _tail_log_share(alpha, beta, v2, max_iter=100):
    """Solve ``-2 ln Q = v2`` on one flank of the top, in log coordinates.

    With ``a = ln(alpha * share)`` the flank equation reads
    ``g(a) = -(2/alpha) a - (2/beta) ln(beta (1 - e^a / alpha)) - v2 = 0``.
    g is convex and decreasing for a < 0, and the start ``a = -alpha v2 / 2``
    has g < 0, so Newton converges monotonically after its first step.
    """
    a = -0.5 * alpha * v2
    for _ in range(max_iter):
        share = np.exp(a) / alpha
        g = -(2.0 / alpha) * a - (2.0 / beta) * (math.log(beta) + np.log1p(-share)) - v2
        dg = -2.0 * (1.0 / alpha - share / (beta * (1.0 - share)))
        a_new = a - g / dg
        if np.all(np.abs(a_new - a) <= 4.0 * _EPS * np.maximum(1.0, np.abs(a))):
            return a_new
        a = a_new
    raise ConvergenceError("level-set inversion did not converge on a flank")


def _invert_h_centre(e, v, max_iter):
    lo = np.where(v < 0.0, -1.0 / e.p, 0.0)
    hi = np.where(v < 0.0, 0.0, 1.0 / e.q)
    x = np.clip(v / math.sqrt(e.p + e.q), 0.5 * lo, 0.5 * hi)
    done = v == 0.0
    x = np.where(done, 0.0, x)
    for _ in range(max_iter):
        if np.all(done):
            return x
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            f = h_func(e, x) - v
            lo = np.where(f < 0.0, x, lo)
            hi = np.where(f > 0.0, x, hi)
            x_new = x - f / h_prime(e, x)
        bad = ~np.isfinite(x_new) | (x_new < lo) | (x_new > hi)
        x_new = np.where(bad, 0.5 * (lo + hi), x_new)
        # h carries ~10 ulps of noise, so stop on a step, bracket or residual
        # at that level; otherwise Newton can cycle between neighbouring floats
        settled = np.abs(f) <= 32.0 * _EPS * np.abs(v)
        newly = (
            settled
            | (np.abs(x_new - x) <= 16.0 * _EPS * np.abs(x_new))
            | (hi - lo <= 16.0 * _EPS * np.maximum(np.abs(lo), np.abs(hi)))
        )
        x = np.where(done | settled, x, x_new)
        done = done | newly
    raise ConvergenceError("level-set inversion did not converge")


def invert_h(e, v, max_iter=200):
    """Solve h(x) = v elementwise for x in (-1/p, 1/q).

    Near the top (|v| <= 1) a bracketed Newton iteration on h itself; on the
    flanks Newton on ``-2 ln Q`` in ``ln(p r)`` or ``ln(q (1-r))``.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    x = np.empty_like(v)
    centre = np.abs(v) <= _TAIL_SPLIT
    left = v < -_TAIL_SPLIT
    right = v > _TAIL_SPLIT
    if centre.any():
        x[centre] = _invert_h_centre(e, v[centre], max_iter)
    if left.any():
        a = _tail_log_share(e.p, e.q, v[left] ** 2)
        x[left] = np.expm1(a) / e.p
    if right.any():
        b = _tail_log_share(e.q, e.p, v[right] ** 2)
        x[right] = -np.expm1(b) / e.q
    return x


def level_roots(e, mu):
    """The two solutions ``r_- < 1/p < r_+`` of ``Q_p(r) = mu`` for mu in (0, 1).

    The roots are located in the centred coordinate and then polished by a
    Newton iteration on ``ln Q`` in ``ln r`` (resp. ``ln(1-r)``) when they sit
    close to the ends, where the centred coordinate loses relative accuracy.
    """
    mu = float(mu)
    if not 0.0 < mu < 1.0:
        raise DomainError(f"momentum mu={mu!r} outside (0, 1)")
    v = math.sqrt(-2.0 * math.log(mu))
    xm, xp = invert_h(e, [-v, v])
    r_minus = e.top + xm
    r_plus = e.top + xp
    log_mu = math.log(mu)
    if r_minus < 0.5 * e.top:
        r_minus = _polish_low(e, r_minus, log_mu)
    if 1.0 - r_plus < 0.5 * (1.0 - e.top):
        r_plus = _polish_high(e, r_plus, log_mu)
    return r_minus, r_plus


def _log_q(e, r, one_minus_r):
    return math.log(e.p * r) / e.p + math.log(e.q * one_minus_r) / e.q


def _polish_low(e, r, log_mu):
    # Newton in s = ln r; d lnQ / ds = 1/p - r / (q (1-r)) stays near 1/p
    s = math.log(max(r, 1e-300))
    for _ in range(50):
        r = math.exp(s)
        f = _log_q(e, r, -math.expm1(s)) - log_mu
        d = 1.0 / e.p - r / (e.q * (1.0 - r))
        ds = f / d
        s -= ds
        if abs(ds) < 1e-16:
            break
    return math.exp(s)


def _polish_high(e, r, log_mu):
    # Newton in s = ln(1-r)
    s = math.log(max(1.0 - r, 1e-300))
    for _ in range(50):
        om = math.exp(s)
        rr = -math.expm1(s)
        f = _log_q(e, rr, om) - log_mu
        d = -om / (e.p * rr) + 1.0 / e.q
        ds = f / d
        s -= ds
        if abs(ds) < 1e-16:
            break
    return -math.expm1(s)


# --- generalized cosine ----------------------------------------------------

COS_P_RTOL = 1e-13


def scalar_rhs(e, lam_p=1.0):
    """Right-hand side of x' = phi_q(y), y' = -lam_p * phi_p(x)."""
    p, q = e.p, e.q

    def rhs(t, s):
        return [_ode.phi_scalar(s[1], q), -lam_p * _ode.phi_scalar(s[0], p)]

    return rhs


@lru_cache(maxsize=64)
def _cos_p_period(e):
    x0 = e.p ** (1.0 / e.p)
    return _ode.integrate(scalar_rhs(e), 2.0 * e.pi_p, [x0, 0.0], rtol=COS_P_RTOL, atol=1e-15)


def cos_p_closure(e):
    """Norm of the state difference of the generalized cosine over one period 2 pi_p."""
    sol = _cos_p_period(e)
    return float(np.linalg.norm(sol.sol(2.0 * e.pi_p) - sol.sol(0.0)))


def cos_p(e, t):
    """Generalized cosine and its derivative.

    The solution of the scalar scaling oscillator ``x' = phi_q(y)``,
    ``y' = -phi_p(x)`` that starts at the top of its swing, ``x(0) = p^(1/p)``,
    ``y(0) = 0``, so that ``|x|^p/p + |y|^q/q = 1``.  Its period is
    ``2 pi_p``; for p = 2 it is ``sqrt(2) cos t``.

    Returns
    -------
    value, derivative : float or ndarray
        ``x(t)`` and ``x'(t) = phi_q(y(t))``.
    """
    sol = _cos_p_period(e)
    tt = np.mod(np.asarray(t, dtype=float), 2.0 * e.pi_p)
    xy = sol.sol(np.atleast_1d(tt))
    x, y = xy[0], xy[1]
    dx = np.sign(y) * np.abs(y) ** (e.q - 1.0)
    if np.ndim(t) == 0:
        return float(x[0]), float(dx[0])
    return x, dx


def cos_p_state(e, t):
    """Phase state (x, y) of the generalized cosine, y = phi_p(x')."""
    sol = _cos_p_period(e)
    tt = np.mod(np.asarray(t, dtype=float), 2.0 * e.pi_p)
    xy = sol.sol(np.atleast_1d(tt))
    return xy[0], xy[1]

"""High-precision reference values computed independently of the package.

The period integrals are evaluated straight from their r-forms with mpmath:
the level roots by plain bisection at 45 digits, the integrals by tanh-sinh
quadrature after the substitution r = r_- + (r_+ - r_-)(1 - cos w)/2.
"""

from functools import lru_cache

import mpmath as mp

DPS = 40


def _q(p, r):
    q = p / (p - 1)
    return (p * r) ** (1 / p) * (q * (1 - r)) ** (1 / q)


def _bisect(f, a, b, iters=200):
    fa = f(a)
    for _ in range(iters):
        c = (a + b) / 2
        fc = f(c)
        if fc == 0:
            return c
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    return (a + b) / 2


@lru_cache(maxsize=None)
def level_roots(p, mu):
    with mp.workdps(DPS + 5):
        p, mu = mp.mpf(p), mp.mpf(mu)
        top = 1 / p
        lo = _bisect(lambda r: _q(p, r) - mu, mp.mpf(0), top)
        hi = _bisect(lambda r: _q(p, r) - mu, top, mp.mpf(1))
        return lo, hi


@lru_cache(maxsize=None)
def periods(p, mu):
    """(T, S) at (p, mu) as floats."""
    r_lo, r_hi = level_roots(p, mu)
    with mp.workdps(DPS):
        p_, mu_ = mp.mpf(p), mp.mpf(mu)
        q_ = p_ / (p_ - 1)
        half = (r_hi - r_lo) / 2

        def parts(w):
            r = r_lo + half * (1 - mp.cos(w))
            qv = _q(p_, r)
            d = qv * qv - mu_ * mu_
            if d <= 0:
                return None
            jac = half * mp.sin(w) / mp.sqrt(d)
            return r, qv, jac

        def t_int(w):
            got = parts(w)
            if got is None:
                return mp.mpf(0)
            r, qv, jac = got
            f = (p_ * r) ** (1 / q_) * (q_ * (1 - r)) ** (1 / p_)
            return qv / f * jac

        def s_int(w):
            got = parts(w)
            if got is None:
                return mp.mpf(0)
            r, _, jac = got
            return jac / (p_ * r * q_ * (1 - r))

        t_val = mp.quad(t_int, [0, mp.pi / 2, mp.pi]) / mp.pi
        s_val = mu_ * mp.quad(s_int, [0, mp.pi / 2, mp.pi]) / mp.pi
        return float(t_val), float(s_val)


def pi_p(p):
    """Half period of the scalar oscillator from its quarter-period integral.

    On ``|x|^p / p + |y|^q / q = 1`` with ``x' = |y|^(q-2) y`` the speed is
    ``(q (1 - x^p / p))^(1/p)``, so ``pi_p / 2`` is the integral of its
    reciprocal from 0 to ``p^(1/p)``.
    """
    with mp.workdps(DPS):
        p = mp.mpf(p)
        q = p / (p - 1)
        top = p ** (1 / p)

        def speed_inv(u):
            rest = 1 - u**p
            return (q * rest) ** (-1 / p) if rest > 0 else mp.mpf(0)

        # x = top * u
        quarter = top * mp.quad(speed_inv, [0, mp.mpf(1) / 2, 1])
        return float(2 * quarter)

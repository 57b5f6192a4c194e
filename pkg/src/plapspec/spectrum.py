"""Eigenvalue generators built from the period functions.

Every irreducible ratio ``ell/m`` in the range of S_p gives at least one
momentum level mu with ``S_p(mu) = ell/m`` and from it the generator
``pi_star = m pi T_p(mu)``.  Two further generators are always present:
``pi_p`` (momentum 0) and ``pi`` (momentum 1).  Each generator carries the
eigenvalue sequence ``2 n pi_star`` in the scaling convention and
``(2 n pi_star)^p`` in the original one.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np
from scipy.optimize import brentq

from . import periodfun
from .exceptions import ConsistencyError, DomainError

DEFAULT_MU_WINDOW = (1e-4, 1.0 - 1e-6)
DEFAULT_MAX_DENOMINATOR = 50
ROOT_TOL = 1e-11
SCAN_SUBINTERVALS = 512
INDEPENDENCE_TOL = 1e-9
IDENTITY_TOL = 1e-8
IDENTITY_HARD_TOL = 1e-6
# the sampled S-range is shrunk by this much before enumerating ratios
RANGE_MARGIN = 1e-10

INDEPENDENCE_CAVEAT = (
    "integer-independence is tested in floating point with a tolerance; "
    "it cannot certify that a ratio is irrational"
)
DEGENERATE_NOTE = "degenerate: S_2 = 1/2 identically, every ratio collapses to pi"

ZERO_MOMENTUM = "zero_momentum"
UNIT_MOMENTUM = "unit_momentum"
RATIONAL = "rational"


@dataclass(frozen=True, order=True)
class RationalIndex:
    """Irreducible positive ratio ell/m."""

    ell: int
    m: int

    def __post_init__(self):
        if int(self.ell) != self.ell or int(self.m) != self.m:
            raise DomainError(f"ratio {self.ell}/{self.m} must have integer terms")
        if self.ell < 1 or self.m < 1:
            raise DomainError(f"ratio {self.ell}/{self.m} must have positive terms")
        if math.gcd(self.ell, self.m) != 1:
            raise DomainError(f"ratio {self.ell}/{self.m} is reducible")

    @property
    def value(self):
        return Fraction(self.ell, self.m)

    def __str__(self):
        return f"{self.ell}/{self.m}"


@dataclass(frozen=True)
class EigenvalueRecord:
    """One generator pi_star and the momentum level it comes from.

    ``kind`` is ``"zero_momentum"``, ``"unit_momentum"`` or ``"rational"``;
    only rational records carry ``index``.  ``identity_gap`` is
    ``|m pi T - ell pi U|``, the disagreement of the two routes to pi_star.
    """

    p: float
    kind: str
    label: str
    mu: float
    pi_star: float
    index: RationalIndex = None
    identity_gap: float = 0.0
    s_residual: float = 0.0

    def lambda_scaling(self, n):
        """Eigenvalue 2 n pi_star of the scaling problem."""
        return 2.0 * n * self.pi_star

    def lambda_original(self, n):
        """Eigenvalue (2 n pi_star)^p of the original problem."""
        return (2.0 * n * self.pi_star) ** self.p


@dataclass(frozen=True)
class IndependenceReport:
    """All pairwise ratios of a generator set and the near-integer ones.

    ``ratios`` holds ``(i, j, pi_i / pi_j)`` for every ordered pair i != j;
    ``violations`` holds ``(i, j, ratio, nearest)`` for ratios within ``tol``
    of a positive integer.
    """

    generators: tuple
    ratios: tuple
    violations: tuple
    tol: float
    caveat: str = INDEPENDENCE_CAVEAT

    @property
    def is_independent(self):
        return not self.violations


@dataclass(frozen=True)
class Spectrum:
    """Output of :func:`build_spectrum`."""

    p: float
    records: tuple
    report: IndependenceReport
    n_max: int
    notes: tuple = field(default_factory=tuple)

    def sequences(self):
        """label -> (scaling eigenvalues, original eigenvalues) for n = 1..n_max."""
        out = {}
        for rec in self.records:
            ns = range(1, self.n_max + 1)
            out[rec.label] = (
                [rec.lambda_scaling(n) for n in ns],
                [rec.lambda_original(n) for n in ns],
            )
        return out


def _check_window(mu_window):
    lo, hi = (float(v) for v in mu_window)
    if not 0.0 < lo < hi <= 1.0:
        raise DomainError(f"momentum window ({lo}, {hi}) must satisfy 0 < lo < hi <= 1")
    return lo, hi


@lru_cache(maxsize=64)
def _s_grid(e, lo, hi, count):
    mus = np.linspace(lo, hi, count)
    svals = np.array([periodfun.s_of_mu(e, mu) for mu in mus])
    mus.setflags(write=False)
    svals.setflags(write=False)
    return mus, svals


def s_range(e, mu_lo=DEFAULT_MU_WINDOW[0], mu_hi=DEFAULT_MU_WINDOW[1], grid_n=SCAN_SUBINTERVALS + 1):
    """Smallest and largest sampled value of S_p on ``[mu_lo, mu_hi]``."""
    lo, hi = _check_window((mu_lo, mu_hi))
    if grid_n < 16:
        raise DomainError(f"grid_n={grid_n} must be at least 16")
    _, svals = _s_grid(e, lo, hi, int(grid_n))
    return float(svals.min()), float(svals.max())


def _farey(n):
    """Irreducible ratios in [0, 1] with denominator <= n, ascending."""
    a, b, c, d = 0, 1, 1, n
    yield a, b
    while c <= n:
        k = (n + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        yield a, b


def enumerate_indices(e, max_denominator=DEFAULT_MAX_DENOMINATOR, mu_window=DEFAULT_MU_WINDOW):
    """Irreducible ell/m, m <= max_denominator, strictly inside the sampled S-range.

    Ascending by value.  The range is shrunk by a tiny margin so that a
    numerically flat S (p = 2) yields nothing.
    """
    if max_denominator < 2:
        raise DomainError("max_denominator must be at least 2")
    lo, hi = _check_window(mu_window)
    s_min, s_max = s_range(e, lo, hi)
    s_min += RANGE_MARGIN
    s_max -= RANGE_MARGIN
    out = []
    for a, b in _farey(int(max_denominator)):
        if a == 0:
            continue
        if a / b >= s_max:
            break
        if a / b > s_min:
            out.append(RationalIndex(a, b))
    return out


def solve_momentum(e, idx, mu_window=DEFAULT_MU_WINDOW, subintervals=SCAN_SUBINTERVALS, root_tol=ROOT_TOL):
    """Every mu in the window with ``S_p(mu) = ell/m``, ascending.

    A sign-change scan over ``subintervals`` equal pieces is followed by
    Brent's method on each bracket.  Grid points where S already matches to
    the root tolerance are returned as they are; for p = 2 this makes every
    grid point a root, which is the expected degenerate answer.
    """
    if not isinstance(idx, RationalIndex):
        idx = RationalIndex(*idx)
    lo, hi = _check_window(mu_window)
    if hi >= 1.0:
        raise DomainError("momentum window must lie inside (0, 1)")
    target = idx.ell / idx.m
    mus, svals = _s_grid(e, lo, hi, int(subintervals) + 1)
    f = svals - target
    hit = np.abs(f) <= root_tol
    roots = [float(mu) for mu in mus[hit]]

    def resid(mu):
        return periodfun.s_of_mu(e, mu) - target

    for k in range(len(mus) - 1):
        if hit[k] or hit[k + 1] or f[k] * f[k + 1] > 0.0:
            continue
        mu = brentq(resid, mus[k], mus[k + 1], xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200)
        if abs(resid(mu)) > root_tol:
            # Brent stops on the bracket width; tighten once with a secant step
            mu = _polish(resid, mu, mus[k], mus[k + 1])
        roots.append(float(mu))
    return sorted(roots)


def _polish(resid, mu, a, b):
    h = 1e-9 * max(1.0, abs(mu))
    f0 = resid(mu)
    slope = (resid(mu + h) - resid(mu - h)) / (2.0 * h)
    if slope != 0.0:
        cand = mu - f0 / slope
        if a <= cand <= b and abs(resid(cand)) < abs(f0):
            return cand
    return mu


def make_record(e, idx, mu, label=None):
    """Generator ``pi_star = m pi T_p(mu)`` for a verified root mu of ``S = ell/m``."""
    if not isinstance(idx, RationalIndex):
        idx = RationalIndex(*idx)
    trip = periodfun.period_triple(e, mu)
    pi_star = idx.m * math.pi * trip.t_val
    alt = idx.ell * math.pi * trip.u_val
    gap = abs(pi_star - alt)
    if gap > IDENTITY_HARD_TOL * pi_star:
        raise ConsistencyError(
            f"m pi T and ell pi U disagree by {gap:.3e} at p={e.p}, {idx}, mu={mu}"
        )
    return EigenvalueRecord(
        p=e.p,
        kind=RATIONAL,
        label=label or str(idx),
        mu=float(mu),
        pi_star=pi_star,
        index=idx,
        identity_gap=gap,
        s_residual=abs(trip.s_val - idx.ell / idx.m),
    )


def base_records(e):
    """The momentum-0 generator pi_p and the momentum-1 generator pi."""
    zero = EigenvalueRecord(p=e.p, kind=ZERO_MOMENTUM, label="pi_p", mu=0.0, pi_star=e.pi_p)
    unit = EigenvalueRecord(p=e.p, kind=UNIT_MOMENTUM, label="pi", mu=1.0, pi_star=math.pi)
    return zero, unit


def independence_check(records, tol=INDEPENDENCE_TOL):
    """Test every ordered ratio of generators against the positive integers."""
    if tol <= 0.0:
        raise DomainError("tolerance must be positive")
    gens = tuple((rec.label, rec.pi_star) for rec in records)
    ratios = []
    violations = []
    for i, (_, a) in enumerate(gens):
        for j, (_, b) in enumerate(gens):
            if i == j:
                continue
            ratio = a / b
            ratios.append((i, j, ratio))
            nearest = round(ratio)
            if nearest >= 1 and abs(ratio - nearest) < tol:
                violations.append((i, j, ratio, int(nearest)))
    return IndependenceReport(tuple(gens), tuple(ratios), tuple(violations), tol)


def build_spectrum(
    e,
    max_denominator=DEFAULT_MAX_DENOMINATOR,
    n_max=3,
    mu_window=DEFAULT_MU_WINDOW,
    tol=INDEPENDENCE_TOL,
    root_tol=ROOT_TOL,
):
    """Base generators plus one record per (ratio, root), with the independence report.

    Rational records are ordered by (m, ell) and, for several roots of one
    ratio, by mu.  Coinciding base generators (p = 2) are kept once.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    zero, unit = base_records(e)
    notes = []
    if abs(zero.pi_star - unit.pi_star) <= tol * unit.pi_star:
        records = [unit]
        notes.append(DEGENERATE_NOTE)
    else:
        records = [zero, unit]
    rational = []
    for idx in enumerate_indices(e, max_denominator, mu_window):
        roots = solve_momentum(e, idx, mu_window, root_tol=root_tol)
        for k, mu in enumerate(roots):
            label = str(idx) if len(roots) == 1 else f"{idx}#{k + 1}"
            rational.append(make_record(e, idx, mu, label))
    rational.sort(key=lambda rec: (rec.index.m, rec.index.ell, rec.mu))
    records.extend(rational)
    report = independence_check(records, tol)
    return Spectrum(e.p, tuple(records), report, int(n_max), tuple(notes))

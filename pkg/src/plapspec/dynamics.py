"""ODE layer: the reduced planar flow, eigenfunction recovery and the full flow.

The full system in the phase space R^2 x R^2 is

    x' = phi_q(y),    y' = -lam^p phi_p(x),      phi_a(v) = ||v||^(a-2) v

with energy ``H = lam^p ||x||^p / p + ||y||^q / q`` and angular momentum
``M = x1 y2 - x2 y1``.  On the unit level of the scaling system (lam = 1) the
substitution ``x = (p r)^(1/p) e^(i phi)``, ``y = (q (1-r))^(1/q) e^(i psi)``,
``theta = psi - phi`` reduces it to

    r' = F(r) cos(theta),   theta' = G(r) sin(theta),
    phi' = (p r)^(-1/p) (q (1-r))^(1/p) sin(theta)

on which ``Q(r) sin(theta) = M`` is conserved.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _ode, specfun
from .exceptions import ConsistencyError, DomainError, IntegrationError

REDUCED_TOL = 1e-11
RETURN_TOL = 1e-12
FULL_TOL = 1e-11
CLOSURE_TOL = 1e-6
CLOSURE_HARD_TOL = 1e-4
DEFAULT_SAMPLES = 1024
PHASE_COLUMNS = ("x1", "x2", "y1", "y2")
REDUCED_COLUMNS = ("r", "theta", "phi")


@dataclass(frozen=True)
class PhaseState:
    """A point (x, y) of the full phase space."""

    x1: float
    x2: float
    y1: float
    y2: float

    def as_array(self):
        return np.array([self.x1, self.x2, self.y1, self.y2], dtype=float)

    @property
    def m_ang(self):
        """Angular momentum x1 y2 - x2 y1."""
        return self.x1 * self.y2 - self.x2 * self.y1

    def energy(self, e, lam=1.0):
        """H_lam = lam^p ||x||^p / p + ||y||^q / q."""
        return energy(e, lam, self.as_array())


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution; ``states[k]`` is the state at ``t[k]``."""

    t: np.ndarray
    states: np.ndarray
    columns: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        states = np.array(self.states, dtype=float)
        if t.ndim != 1 or states.shape != (t.size, len(self.columns)):
            raise DomainError("trajectory shape does not match its columns")
        if t.size > 1 and np.any(np.diff(t) <= 0.0):
            raise DomainError("trajectory times must be strictly increasing")
        t.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "meta", dict(self.meta))

    def column(self, name):
        return self.states[:, self.columns.index(name)]


def energy(e, lam, states):
    """H_lam for one state or an (N, 4) array of states."""
    s = np.asarray(states, dtype=float)
    nx = np.hypot(s[..., 0], s[..., 1])
    ny = np.hypot(s[..., 2], s[..., 3])
    return lam**e.p * nx**e.p / e.p + ny**e.q / e.q


def angular_momentum(states):
    s = np.asarray(states, dtype=float)
    return s[..., 0] * s[..., 3] - s[..., 1] * s[..., 2]


def energy_split(e, traj):
    """Potential and kinetic shares ``P = ||x||^p / p`` and ``K = 1 - P`` on the unit level."""
    nx = np.hypot(traj.column("x1"), traj.column("x2"))
    pot = nx**e.p / e.p
    return pot, 1.0 - pot


# --- reduced system ----------------------------------------------------------


def reduced_rhs(e):
    """Vector field of (r, theta, phi)."""
    p, q = e.p, e.q
    fs = p ** (1.0 / q) * q ** (1.0 / p)

    def rhs(t, s):
        r, th = s[0], s[1]
        r = min(max(r, 1e-300), 1.0 - 1e-16)
        pr, qs = p * r, q * (1.0 - r)
        sin_t, cos_t = math.sin(th), math.cos(th)
        f = pr ** (1.0 / q) * qs ** (1.0 / p)
        g = fs * (r - 1.0 / p) / (r ** (1.0 / p) * (1.0 - r) ** (1.0 / q))
        dphi = (qs / pr) ** (1.0 / p) * sin_t
        return [f * cos_t, g * sin_t, dphi]

    return rhs


def _check_open_mu(mu):
    mu = float(mu)
    if not 0.0 < mu <= 1.0:
        raise DomainError(f"momentum mu={mu!r} outside (0, 1]")
    return mu


def _reduced_start(e, mu):
    r_minus, _ = specfun.level_roots(e, mu)
    return [r_minus, 0.5 * math.pi, 0.0]


def _equilibrium(e, times):
    states = np.column_stack(
        [np.full(times.size, e.top), np.full(times.size, 0.5 * math.pi), times]
    )
    return states


def reduced_flow(e, mu, t_end, tol=REDUCED_TOL, samples=DEFAULT_SAMPLES):
    """Integrate the reduced system from ``(r_-(mu), pi/2, phi = 0)``.

    ``mu = 1`` is the equilibrium ``(1/p, pi/2)`` with ``phi = t`` and is
    returned in closed form.  The meta entry ``momentum_drift`` is the largest
    deviation of ``Q(r) sin(theta)`` from mu over the samples.
    """
    mu = _check_open_mu(mu)
    if not t_end > 0.0:
        raise DomainError("t_end must be positive")
    times = np.linspace(0.0, float(t_end), int(samples) + 1)
    meta = {"p": e.p, "mu": mu, "tol": tol}
    if mu == 1.0:
        return Trajectory(times, _equilibrium(e, times), REDUCED_COLUMNS, {**meta, "momentum_drift": 0.0})
    sol = _ode.integrate(reduced_rhs(e), times[-1], _reduced_start(e, mu), rtol=tol, atol=tol * 1e-2)
    states = sol.sol(times).T
    r = np.clip(states[:, 0], 1e-300, 1.0 - 1e-16)
    drift = float(np.max(np.abs(specfun.q_func(e, r) * np.sin(states[:, 1]) - mu)))
    meta["momentum_drift"] = drift
    return Trajectory(times, states, REDUCED_COLUMNS, meta)


def _theta_section(direction):
    # a fresh function per call: solve_ivp reads its settings from attributes
    def event(t, s):
        return s[1] - 0.5 * math.pi

    event.terminal = True
    event.direction = direction
    return event


def _first_crossing(e, y0, direction, t_guess, tol):
    """Integrate until theta crosses pi/2 in ``direction``; return (time, state)."""
    event = _theta_section(direction)
    horizon = t_guess
    for _ in range(6):
        sol = _ode.integrate(reduced_rhs(e), horizon, y0, rtol=tol, atol=tol * 1e-2, events=event)
        if sol.t_events[0].size:
            return float(sol.t_events[0][0]), np.array(sol.y_events[0][0])
        horizon *= 2.0
    raise IntegrationError("no return to the section theta = pi/2")


def _one_period(e, mu, tol):
    # first leg ends on the section at r_+ (theta crossing upward), the
    # second back at r_- (crossing downward); starting each leg on the
    # opposite crossing keeps the start point from registering as an event
    guess = 2.0 * math.pi * max(e.c1, e.pi_p / (2.0 * math.pi)) * 1.5
    y0 = _reduced_start(e, mu)
    t1, s1 = _first_crossing(e, y0, 1, guess, tol)
    t2, s2 = _first_crossing(e, s1, -1, guess, tol)
    return t1 + t2, s2


def return_time(e, mu, tol=RETURN_TOL):
    """Period of the reduced orbit through ``(r_-(mu), pi/2)``; equals ``2 pi T(mu)``.

    ``mu = 1`` returns ``2 pi c1``, the limit of the periods.
    """
    mu = _check_open_mu(mu)
    if mu == 1.0:
        return 2.0 * math.pi * e.c1
    period, _ = _one_period(e, mu, tol)
    return period


def phi_winding(e, mu, tol=RETURN_TOL):
    """Growth of phi over one reduced period, divided by 2 pi; equals S(mu)."""
    mu = _check_open_mu(mu)
    if mu == 1.0:
        return e.c1
    _, end = _one_period(e, mu, tol)
    return float(end[2]) / (2.0 * math.pi)


def recover_phase(e, reduced_states):
    """Map reduced samples (r, theta, phi) to phase samples (x1, x2, y1, y2)."""
    s = np.asarray(reduced_states, dtype=float)
    r, th, ph = s[:, 0], s[:, 1], s[:, 2]
    rad_x = (e.p * r) ** (1.0 / e.p)
    rad_y = np.maximum(e.q * (1.0 - r), 0.0) ** (1.0 / e.q)
    psi = th + ph
    return np.column_stack(
        [rad_x * np.cos(ph), rad_x * np.sin(ph), rad_y * np.cos(psi), rad_y * np.sin(psi)]
    )


def reduce_state(e, states):
    """Inverse of :func:`recover_phase` on the unit level: (r, theta, phi) per sample.

    theta is taken in [0, 2 pi) and phi in (-pi, pi]; neither is unwrapped.
    """
    s = np.atleast_2d(np.asarray(states, dtype=float))
    nx = np.hypot(s[:, 0], s[:, 1])
    r = nx**e.p / e.p
    ph = np.arctan2(s[:, 1], s[:, 0])
    psi = np.arctan2(s[:, 3], s[:, 2])
    th = np.mod(psi - ph, 2.0 * math.pi)
    return np.column_stack([r, th, ph])


def reconstruct_eigenfunction(e, record, n=1, samples=DEFAULT_SAMPLES, tol=RETURN_TOL):
    """Phase trajectory of the eigenfunction of ``record`` on ``[0, 2 n pi_star]``.

    The solution lives on the unit level of the scaling system and has
    momentum ``record.mu``.  Momentum 0 is the generalized cosine along the
    x1 axis, momentum 1 the unit circle.  Meta entries: ``closure`` (norm of
    the state difference across one eigen-period), ``energy_error``,
    ``momentum_error``.

    Raises
    ------
    ConsistencyError
        If the closure error exceeds 1e-4, which means the record does not
        describe a periodic solution.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if samples < 64:
        raise DomainError("at least 64 samples are required")
    lam = record.lambda_scaling(n)
    times = np.linspace(0.0, lam, int(samples) + 1)
    if record.mu == 0.0:
        x, y = specfun.cos_p_state(e, times)
        zeros = np.zeros_like(x)
        states = np.column_stack([x, zeros, y, zeros])
        # lam is a multiple of the period 2 pi_p, so the closure error is that
        # of the integrated period, before any reduction modulo 2 pi_p
        closure = specfun.cos_p_closure(e)
    elif record.mu == 1.0:
        c, s = np.cos(times), np.sin(times)
        states = np.column_stack([c, s, -s, c])
        closure = float(np.hypot(math.cos(lam) - 1.0, math.sin(lam)) * math.sqrt(2.0))
    else:
        sol = _ode.integrate(
            reduced_rhs(e), lam, _reduced_start(e, record.mu), rtol=tol, atol=tol * 1e-2
        )
        states = recover_phase(e, sol.sol(times).T)
        closure = float(np.linalg.norm(states[-1] - states[0]))
    if not closure <= CLOSURE_HARD_TOL:
        raise ConsistencyError(
            f"eigenfunction for {record.label} fails to close: error {closure:.3e}"
        )
    meta = {
        "p": e.p,
        "label": record.label,
        "mu": record.mu,
        "lambda_scaling": lam,
        "n": n,
        "tol": tol,
        "closure": closure,
        "energy_error": float(np.max(np.abs(energy(e, 1.0, states) - 1.0))),
        "momentum_error": float(np.max(np.abs(angular_momentum(states) - record.mu))),
    }
    return Trajectory(times, states, PHASE_COLUMNS, meta)


# --- full system ---------------------------------------------------------------


def full_rhs(e, lam):
    p, q = e.p, e.q
    lam_p = lam**p

    def rhs(t, s):
        dx1, dx2 = _ode.phi_vec(s[2], s[3], q)
        fx1, fx2 = _ode.phi_vec(s[0], s[1], p)
        return [dx1, dx2, -lam_p * fx1, -lam_p * fx2]

    return rhs


def full_flow(e, lam, initial, t_end, tol=FULL_TOL, samples=DEFAULT_SAMPLES):
    """Integrate the full system from ``initial`` over ``[0, t_end]``.

    Meta entries: ``lam``, ``h`` and ``mu`` (energy and momentum of the
    initial state), ``energy_drift`` (relative) and ``momentum_drift``
    (absolute), both maxima over the samples.
    """
    y0 = initial.as_array() if isinstance(initial, PhaseState) else np.asarray(initial, dtype=float)
    if y0.shape != (4,):
        raise DomainError("initial state must have four components")
    if not np.any(y0 != 0.0):
        raise DomainError("the zero state is an equilibrium; nothing to integrate")
    if not (lam > 0.0 and tol > 0.0 and t_end > 0.0):
        raise DomainError("lam, tol and t_end must be positive")
    times = np.linspace(0.0, float(t_end), int(samples) + 1)
    sol = _ode.integrate(full_rhs(e, lam), times[-1], y0, rtol=tol, atol=tol * 1e-2)
    states = sol.sol(times).T
    h0 = float(energy(e, lam, y0))
    m0 = float(angular_momentum(y0))
    meta = {
        "p": e.p,
        "lam": float(lam),
        "tol": tol,
        "h": h0,
        "mu": m0,
        "energy_drift": float(np.max(np.abs(energy(e, lam, states) - h0)) / h0),
        "momentum_drift": float(np.max(np.abs(angular_momentum(states) - m0))),
    }
    return Trajectory(times, states, PHASE_COLUMNS, meta)


def scaling_transform(e, lam, traj):
    """Rescale a full-flow solution to the unit level of the scaling system.

    ``(lam h^(-1/p) x(delta t / lam), delta h^(-1/q) y(delta t / lam))`` with
    ``delta = sign(mu)`` (+1 for mu = 0).  The result has unit energy and
    momentum ``|mu| lam / h``, stored in meta as ``scaling_momentum``.
    """
    h = traj.meta.get("h")
    mu = traj.meta.get("mu")
    if h is None or mu is None:
        raise DomainError("trajectory carries no recorded energy and momentum")
    if not h > 0.0:
        raise DomainError("the zero solution has no scaling transform")
    delta = 1.0 if mu >= 0.0 else -1.0
    sx = lam * h ** (-1.0 / e.p)
    sy = delta * h ** (-1.0 / e.q)
    times = delta * lam * traj.t
    states = traj.states * np.array([sx, sx, sy, sy])
    if delta < 0.0:
        times, states = times[::-1], states[::-1]
    meta = {
        "p": e.p,
        "lam": 1.0,
        "h": 1.0,
        "source_lam": float(lam),
        "source_h": float(h),
        "source_mu": float(mu),
        "delta": delta,
        "scaling_momentum": abs(mu) * lam / h,
    }
    return Trajectory(times, states, PHASE_COLUMNS, meta)


def level_curve(e, mu, count=400):
    """Closed orbit C_mu of the reduced system as arrays (r, theta).

    The lower branch ``theta = arcsin(mu / Q(r))`` is traced from r_- to r_+
    and the upper branch ``pi - theta`` back again.  ``mu = 1`` gives the
    equilibrium as a single point.
    """
    mu = _check_open_mu(mu)
    if mu == 1.0:
        return np.array([e.top]), np.array([0.5 * math.pi])
    r_lo, r_hi = specfun.level_roots(e, mu)
    w = np.linspace(0.0, math.pi, int(count))
    r = r_lo + 0.5 * (r_hi - r_lo) * (1.0 - np.cos(w))
    r = np.clip(r, r_lo, r_hi)
    inner = np.clip(mu / specfun.q_func(e, np.clip(r, 1e-300, 1.0 - 1e-16)), -1.0, 1.0)
    th = np.arcsin(inner)
    return np.concatenate([r, r[::-1]]), np.concatenate([th, math.pi - th[::-1]])

"""Self-check suite behind ``plapspec verify``.

Each check returns a small dict with ``name``, ``passed`` and numeric detail.
A check that raises is recorded as failed with the error text; the suite
always runs to the end.
"""

import math

import numpy as np

from . import dynamics, periodfun, spectrum, specfun
from .exceptions import ConvergenceError, ConsistencyError, DomainError, IntegrationError

# fixed initial states for the conservation check; no randomness in production
_PHASE_STARTS = (
    (0.7, -0.2, 0.3, 0.9),
    (-1.1, 0.4, 0.05, -0.6),
    (0.2, 0.8, -1.3, 0.1),
)

# reference values quoted to four decimals: (p, ell, m) -> (mu, pi_star)
REFERENCE_VALUES = {
    (3.0, 9, 19): (0.8906, 28.2668),
    (5.0, 3, 7): (0.6776, 9.3183),
    (5.0, 4, 9): (0.5293, 12.2510),
}
REFERENCE_RATIOS = {
    3.0: {("9/19", "pi"): 8.9976, ("9/19", "pi_p"): 9.2769},
    5.0: {("4/9", "3/7"): 1.3147},
}


def _result(name, passed, **detail):
    return {"name": name, "passed": bool(passed), **detail}


def check_conjugate_symmetry(e, mus=(0.1, 0.4, 0.7, 0.95)):
    f = specfun.make_exponent(e.q)
    worst = 0.0
    for mu in mus:
        a, b = periodfun.period_triple(e, mu), periodfun.period_triple(f, mu)
        worst = max(worst, abs(a.t_val - b.t_val), abs(a.s_val - b.s_val))
    return _result("conjugate_symmetry", worst <= 1e-9, max_error=worst, tol=1e-9)


def check_flat_p2(mus=(0.05, 0.35, 0.65, 0.95)):
    e = specfun.make_exponent(2.0)
    worst = max(
        max(abs(tr.t_val - 0.5), abs(tr.s_val - 0.5))
        for tr in (periodfun.period_triple(e, mu) for mu in mus)
    )
    return _result("p2_flatness", worst <= 1e-10, max_error=worst, tol=1e-10)


def check_asymptotics(e, h=1e-3):
    """Quadrature against the quadratic expansion at mu = 1 - h.

    The remainder is cubic in h, so a bound of ``c2 h^2`` (plus roundoff) is
    generous for a correct table of constants but is broken by an error of
    order h in any coefficient, e.g. a sign flip of c2.
    """
    tr = periodfun.period_triple(e, 1.0 - h)
    t_exp = e.c1 + e.c2 * h + e.c3 * h * h
    s_exp = e.c1 + e.c2 * h + e.c4 * h * h
    err_t, err_s = abs(tr.t_val - t_exp), abs(tr.s_val - s_exp)
    bound = abs(e.c2) * h * h + 1e-12
    slope = periodfun.u_slope_check(e, 1.0 - h)
    expected = e.c7 * h
    if expected == 0.0:
        slope_ok = abs(slope) <= 1e-6
    else:
        slope_ok = abs(slope - expected) <= 0.2 * abs(expected)
    return _result(
        "asymptotics",
        err_t <= bound and err_s <= bound and slope_ok,
        t_error=err_t,
        s_error=err_s,
        bound=bound,
        u_slope=slope,
        u_slope_expected=expected,
    )


def check_limits(e, mu=1e-4):
    tr = periodfun.period_triple(e, mu)
    t0, s0 = periodfun.limits_at_zero(e)
    err_t, err_s = abs(tr.t_val - t0), abs(tr.s_val - s0)
    return _result("limits_at_zero", err_t <= 5e-3 and err_s <= 5e-3, t_error=err_t, s_error=err_s, tol=5e-3)


def check_oracle(e, ode_tol, mus=(0.2, 0.5, 0.8)):
    worst = 0.0
    for mu in mus:
        tr = periodfun.period_triple(e, mu)
        t_ode = dynamics.return_time(e, mu, tol=min(ode_tol, 1e-12)) / (2.0 * math.pi)
        s_ode = dynamics.phi_winding(e, mu, tol=min(ode_tol, 1e-12))
        worst = max(worst, abs(t_ode / tr.t_val - 1.0), abs(s_ode / tr.s_val - 1.0))
    return _result("ode_quadrature_equivalence", worst <= 1e-7, max_rel_error=worst, tol=1e-7)


def check_conservation(e, ode_tol):
    worst_h = worst_m = 0.0
    for k, start in enumerate(_PHASE_STARTS):
        traj = dynamics.full_flow(e, 1.0 + 0.5 * k, start, 10.0, tol=ode_tol, samples=256)
        worst_h = max(worst_h, traj.meta["energy_drift"])
        worst_m = max(worst_m, traj.meta["momentum_drift"])
        scaled = dynamics.scaling_transform(e, 1.0 + 0.5 * k, traj)
        if not 0.0 <= scaled.meta["scaling_momentum"] <= 1.0 + 1e-12:
            return _result("conservation", False, reason="scaling momentum outside [0, 1]")
    return _result(
        "conservation", worst_h <= 1e-8 and worst_m <= 1e-8, energy_drift=worst_h, momentum_drift=worst_m, tol=1e-8
    )


def check_spectrum(e, max_denominator, root_tol, independence_tol):
    spec = spectrum.build_spectrum(e, max_denominator, 2, tol=independence_tol, root_tol=root_tol)
    worst_gap = max((r.identity_gap / r.pi_star for r in spec.records), default=0.0)
    worst_res = max((r.s_residual for r in spec.records), default=0.0)
    passed = worst_gap <= 1e-8 and worst_res <= max(root_tol, 1e-11) and spec.report.is_independent
    if e.p == 2.0:
        passed = passed and len(spec.records) == 1
    return _result(
        "spectrum_consistency",
        passed,
        generators=len(spec.records),
        identity_gap=worst_gap,
        s_residual=worst_res,
        violations=len(spec.report.violations),
    ), spec


def check_reference_values(e, spec):
    """Momenta, generators and ratios against the four-decimal reference table."""
    labels = {r.label: r for r in spec.records}
    rows = []
    passed = True
    for (p, ell, m), (mu_ref, pi_ref) in REFERENCE_VALUES.items():
        if p != e.p:
            continue
        rec = labels.get(f"{ell}/{m}")
        if rec is None:
            rows.append({"index": f"{ell}/{m}", "found": False})
            passed = False
            continue
        ok = abs(rec.mu - mu_ref) <= 5e-4 and abs(rec.pi_star - pi_ref) <= 5e-3
        rows.append({"index": rec.label, "mu": rec.mu, "pi_star": rec.pi_star, "ok": ok})
        passed = passed and ok
    for (a, b), ref in REFERENCE_RATIOS.get(e.p, {}).items():
        if a in labels and b in labels:
            ratio = labels[a].pi_star / labels[b].pi_star
            ok = abs(ratio - ref) <= 1e-3
            rows.append({"ratio": f"{a} : {b}", "value": ratio, "ok": ok})
            passed = passed and ok
    return _result("reference_values", passed, rows=rows, checked=bool(rows))


def check_eigenfunctions(e, spec, ode_tol):
    worst_closure = worst_energy = worst_momentum = 0.0
    rational = [r for r in spec.records if r.kind == spectrum.RATIONAL][:2]
    base = list(spec.records[:2])
    for rec in base + rational:
        traj = dynamics.reconstruct_eigenfunction(e, rec, 1, samples=512, tol=min(ode_tol, 1e-12))
        worst_closure = max(worst_closure, traj.meta["closure"])
        worst_energy = max(worst_energy, traj.meta["energy_error"])
        worst_momentum = max(worst_momentum, traj.meta["momentum_error"])
    return _result(
        "eigenfunction_closure",
        worst_closure <= 1e-6 and worst_energy <= 1e-8 and worst_momentum <= 1e-8,
        closure=worst_closure,
        energy_error=worst_energy,
        momentum_error=worst_momentum,
    )


def _guarded(name, fn, *args):
    try:
        return fn(*args)
    except (ConvergenceError, ConsistencyError, DomainError, IntegrationError, ValueError) as exc:
        return _result(name, False, error=f"{type(exc).__name__}: {exc}")


def run_checks(config, exponent=None):
    """Run the whole suite; returns ``{"p", "passed", "checks"}``.

    ``exponent`` replaces the one built from ``config.p``, which lets callers
    inject deliberately wrong constants.
    """
    e = exponent if exponent is not None else specfun.make_exponent(config.p)
    checks = [
        _guarded("conjugate_symmetry", check_conjugate_symmetry, e),
        _guarded("p2_flatness", check_flat_p2),
        _guarded("asymptotics", check_asymptotics, e),
        _guarded("limits_at_zero", check_limits, e),
        _guarded("ode_quadrature_equivalence", check_oracle, e, config.ode_tol),
        _guarded("conservation", check_conservation, e, config.ode_tol),
    ]
    max_den = min(config.max_denominator, 19)
    try:
        spec_check, spec = check_spectrum(e, max_den, config.root_tol, config.independence_tol)
    except (ConvergenceError, ConsistencyError, DomainError, IntegrationError, ValueError) as exc:
        checks.append(_result("spectrum_consistency", False, error=f"{type(exc).__name__}: {exc}"))
    else:
        checks.append(spec_check)
        checks.append(_guarded("reference_values", check_reference_values, e, spec))
        checks.append(_guarded("eigenfunction_closure", check_eigenfunctions, e, spec, config.ode_tol))
    return {
        "p": e.p,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "caveat": spectrum.INDEPENDENCE_CAVEAT,
    }

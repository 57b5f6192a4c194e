"""Command-line entry point: ``plapspec <command> [options]``."""

import argparse
import math
import sys

import numpy as np

from . import dynamics, output, periodfun, spectrum, specfun, verify
from .config import FORMATS, load_config
from .exceptions import ConvergenceError, DomainError


def _mu_values(config):
    lo, hi, count = config.mu_grid
    return np.linspace(lo, hi, count) if count > 1 else np.array([lo])


def _stem(config, name):
    return config.out_path / name


def _log(msg):
    print(msg, file=sys.stderr)


# --- periods ---------------------------------------------------------------------------

PERIOD_HEADER = ("mu", "T", "S", "U", "method")


def cmd_periods(config, write=True):
    """Rows (mu, T, S, U, method) over the momentum grid, plus an SVG graph."""
    e = specfun.make_exponent(config.p)
    rows = []
    for mu in _mu_values(config):
        try:
            tr = periodfun.period_triple(e, float(mu), rel_tol=config.quad_rel_tol)
            rows.append((float(mu), tr.t_val, tr.s_val, tr.u_val, tr.method))
        except ConvergenceError:
            nan = float("nan")
            rows.append((float(mu), nan, nan, nan, "failed"))
    if not write:
        return rows
    base = _stem(config, f"periods_p{config.p:g}")
    if config.output_format == "csv":
        path = output.write_csv(base.with_suffix(".csv"), PERIOD_HEADER, rows)
    else:
        path = output.write_json(
            base.with_suffix(".json"),
            {"p": config.p, "rows": [dict(zip(PERIOD_HEADER, r)) for r in rows]},
        )
    good = [r for r in rows if r[4] != "failed"]
    series = [
        {"x": [r[0] for r in good], "y": [r[1] for r in good], "label": "T(mu)"},
        {"x": [r[0] for r in good], "y": [r[2] for r in good], "label": "S(mu)"},
    ]
    svg = output.svg_plot(series, title=f"Period functions, p = {config.p:g}", xlabel="mu")
    output.write_svg(base.with_name(base.name + "_TS.svg"), svg)
    svg_u = output.svg_plot(
        [{"x": [r[0] for r in good], "y": [r[3] for r in good], "label": "U(mu)"}],
        title=f"U = T/S, p = {config.p:g}",
        xlabel="mu",
    )
    output.write_svg(base.with_name(base.name + "_U.svg"), svg_u)
    failed = len(rows) - len(good)
    if failed:
        _log(f"{failed} grid points did not converge and are flagged 'failed'")
    _log(f"wrote {path}")
    return rows


# --- spectrum --------------------------------------------------------------------------


def _spectrum_rows(spec):
    header = ["label", "kind", "ell", "m", "mu", "pi_star"]
    header += [f"lambda_scaling_{n}" for n in range(1, spec.n_max + 1)]
    header += [f"lambda_original_{n}" for n in range(1, spec.n_max + 1)]
    rows = []
    for rec in spec.records:
        ell = rec.index.ell if rec.index else None
        m = rec.index.m if rec.index else None
        row = [rec.label, rec.kind, ell, m, rec.mu, rec.pi_star]
        row += [rec.lambda_scaling(n) for n in range(1, spec.n_max + 1)]
        row += [rec.lambda_original(n) for n in range(1, spec.n_max + 1)]
        rows.append(row)
    return header, rows


def _ratio_rows(spec):
    header = ["i", "j", "label_i", "label_j", "ratio", "nearest_integer", "violation"]
    bad = {(i, j) for i, j, _, _ in spec.report.violations}
    gens = spec.report.generators
    rows = [
        (i, j, gens[i][0], gens[j][0], ratio, int(round(ratio)), (i, j) in bad)
        for i, j, ratio in spec.report.ratios
    ]
    return header, rows


def cmd_spectrum(config, write=True):
    """Generator table and the pairwise independence report."""
    e = specfun.make_exponent(config.p)
    spec = spectrum.build_spectrum(
        e,
        config.max_denominator,
        config.n_max,
        tol=config.independence_tol,
        root_tol=config.root_tol,
    )
    if not write:
        return spec
    header, rows = _spectrum_rows(spec)
    rheader, rrows = _ratio_rows(spec)
    base = _stem(config, f"spectrum_p{config.p:g}")
    notes = list(spec.notes) + [spec.report.caveat]
    if config.output_format == "csv":
        output.write_csv(base.with_suffix(".csv"), header, rows)
        output.write_csv(base.with_name(base.name + "_ratios.csv"), rheader, rrows)
    else:
        output.write_json(
            base.with_suffix(".json"),
            {
                "p": config.p,
                "records": [dict(zip(header, r)) for r in rows],
                "independence": {
                    "tol": spec.report.tol,
                    "ratios": [dict(zip(rheader, r)) for r in rrows],
                    "independent": spec.report.is_independent,
                },
                "notes": notes,
            },
        )
    for rec in spec.records:
        print(f"{rec.label:>10s}  mu={rec.mu:.6f}  pi*={rec.pi_star:.6f}  lambda={rec.lambda_original(1):.6f}")
    print(f"{len(spec.report.violations)} near-integer ratios among {len(spec.report.ratios)} at tol {spec.report.tol:g}")
    for note in notes:
        print(f"note: {note}")
    return spec


# --- eigenfunction ---------------------------------------------------------------------


class UnresolvedIndex(Exception):
    pass


def resolve_record(e, ell=None, m=None, base=None, root_tol=spectrum.ROOT_TOL):
    """Record for a base generator (``base`` in {zero, unit}) or the ratio ell/m."""
    if base is not None:
        zero, unit = spectrum.base_records(e)
        return zero if base == "zero" else unit
    if ell is None or m is None:
        raise UnresolvedIndex("give both --ell and --m, or --base zero|unit")
    idx = spectrum.RationalIndex(ell, m)
    roots = spectrum.solve_momentum(e, idx, root_tol=root_tol)
    if not roots:
        s_min, s_max = spectrum.s_range(e)
        raise UnresolvedIndex(
            f"{idx} = {ell / m:.6f} is not attained by S on the default window; "
            f"admissible range is about ({s_min:.10f}, {s_max:.10f})"
        )
    if len(roots) > 1:
        _log(f"{idx} has {len(roots)} momentum levels; using mu = {roots[0]:.12g}")
    return spectrum.make_record(e, idx, roots[0])


EIGEN_HEADER = ("t", "x1", "x2", "y1", "y2", "P", "K")


def cmd_eigenfunction(config, ell=None, m=None, n=1, base=None, samples=2048):
    """CSV of (t, x, y, P, K) and three SVG views of one eigenfunction."""
    e = specfun.make_exponent(config.p)
    rec = resolve_record(e, ell, m, base, config.root_tol)
    traj = dynamics.reconstruct_eigenfunction(e, rec, n, samples=samples, tol=min(config.ode_tol, 1e-12))
    pot, kin = dynamics.energy_split(e, traj)
    tag = rec.label.replace("/", "_").replace("#", "_")
    base_path = _stem(config, f"eigen_p{config.p:g}_{tag}_n{n}")
    rows = [(t, *s, a, b) for t, s, a, b in zip(traj.t, traj.states, pot, kin)]
    if config.output_format == "csv":
        output.write_csv(base_path.with_suffix(".csv"), EIGEN_HEADER, rows)
    else:
        output.write_json(
            base_path.with_suffix(".json"),
            {"meta": traj.meta, "columns": list(EIGEN_HEADER), "rows": [list(r) for r in rows]},
        )
    x1, x2 = traj.column("x1"), traj.column("x2")
    orbit = output.svg_plot(
        [{"x": x1, "y": x2}],
        title=f"Orbit (x1, x2), p = {config.p:g}, {rec.label}",
        xlabel="x1",
        ylabel="x2",
        equal_aspect=True,
    )
    output.write_svg(base_path.with_name(base_path.name + "_orbit.svg"), orbit)
    bounds = [(float(traj.t[0]), float(traj.t[-1])), (float(x1.min()), float(x1.max())),
              (float(x2.min()), float(x2.max()))]
    u, v = output.oblique_projection(traj.t, x1, x2, bounds=bounds)
    u1, v1 = output.oblique_projection(traj.t, x1, np.full_like(x2, bounds[2][0]), bounds=bounds)
    u2, v2 = output.oblique_projection(traj.t, np.full_like(x1, bounds[1][1]), x2, bounds=bounds)
    space = output.svg_plot(
        [
            {"x": u1, "y": v1, "label": "x1(t)", "color": "#9aa9c9", "width": 1.0},
            {"x": u2, "y": v2, "label": "x2(t)", "color": "#d7a39b", "width": 1.0},
            {"x": u, "y": v, "label": "(t, x1, x2)", "color": "#1f4e99"},
        ],
        title=f"Trajectory in (t, x1, x2), p = {config.p:g}, {rec.label}",
        axes=False,
    )
    output.write_svg(base_path.with_name(base_path.name + "_trajectory.svg"), space)
    split = output.svg_plot(
        [{"x": traj.t, "y": pot, "label": "P(t)"}, {"x": traj.t, "y": kin, "label": "K(t)"}],
        title=f"Energy split, p = {config.p:g}, {rec.label}",
        xlabel="t",
    )
    output.write_svg(base_path.with_name(base_path.name + "_energy.svg"), split)
    print(
        f"{rec.label}: mu={rec.mu:.12g} lambda={rec.lambda_scaling(n):.12g} "
        f"closure={traj.meta['closure']:.3e} energy_error={traj.meta['energy_error']:.3e}"
    )
    return traj


# --- phase portrait ----------------------------------------------------------------------


def cmd_phase_portrait(config, curves=9):
    """Level curves C_mu of the reduced system and its equilibrium (1/p, pi/2)."""
    e = specfun.make_exponent(config.p)
    lo, hi, _ = config.mu_grid
    series = []
    for mu in np.linspace(max(lo, 1e-3), min(hi, 0.999), curves):
        r, th = dynamics.level_curve(e, float(mu))
        series.append({"x": r, "y": th, "width": 1.0})
    series.append({"x": [e.top], "y": [0.5 * math.pi], "marker": True, "label": "equilibrium", "color": "#000000"})
    svg = output.svg_plot(
        series,
        title=f"Reduced phase portrait, p = {config.p:g}",
        xlabel="r",
        ylabel="theta",
        extent=(0.0, 1.0, 0.0, math.pi),
    )
    path = output.write_svg(_stem(config, f"phase_p{config.p:g}.svg"), svg)
    _log(f"wrote {path}")
    return path


# --- verify ------------------------------------------------------------------------------


def cmd_verify(config, exponent=None):
    summary = verify.run_checks(config, exponent)
    print(output.json_text(summary), end="")
    return summary


# --- argument parsing ---------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plapspec",
        description="Periodic spectrum of the planar vectorial p-Laplacian.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, help="exponent p > 1 (default 3)")
    common.add_argument("--mu-lo", type=float, help="lower end of the momentum grid")
    common.add_argument("--mu-hi", type=float, help="upper end of the momentum grid")
    common.add_argument("--mu-count", type=int, help="number of grid points")
    common.add_argument("--max-denominator", type=int, help="largest m in ell/m (default 50)")
    common.add_argument("--n-max", type=int, help="eigenvalues per sequence (default 3)")
    common.add_argument("--format", choices=FORMATS, help="table format (default csv)")
    common.add_argument("--out", help="output directory (default ./out)")
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--tol-quad", type=float, help="relative quadrature tolerance")
    common.add_argument("--tol-ode", type=float, help="ODE tolerance")
    common.add_argument("--tol-root", type=float, help="root residual tolerance")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("periods", parents=[common], help="tabulate T, S and U over the momentum grid")
    sub.add_parser("spectrum", parents=[common], help="eigenvalue generators and independence report")
    eig = sub.add_parser("eigenfunction", parents=[common], help="reconstruct one eigenfunction")
    eig.add_argument("--ell", type=int, help="numerator of S = ell/m")
    eig.add_argument("--m", type=int, help="denominator of S = ell/m")
    eig.add_argument("--n", type=int, default=1, help="multiple of the generator (default 1)")
    eig.add_argument("--base", choices=("zero", "unit"), help="use the momentum-0 or momentum-1 generator")
    eig.add_argument("--samples", type=int, default=2048, help="samples along the trajectory")
    sub.add_parser("phase-portrait", parents=[common], help="level curves of the reduced system")
    sub.add_parser("verify", parents=[common], help="run the self-check suite")
    return parser


def config_from_args(args):
    overrides = {
        "p": args.p,
        "mu_lo": args.mu_lo,
        "mu_hi": args.mu_hi,
        "mu_count": args.mu_count,
        "max_denominator": args.max_denominator,
        "n_max": args.n_max,
        "output_format": args.format,
        "output_dir": args.out,
        "quad_rel_tol": args.tol_quad,
        "ode_tol": args.tol_ode,
        "root_tol": args.tol_root,
    }
    return load_config(args.config, overrides)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except (DomainError, OSError) as exc:
        parser.error(str(exc))
    try:
        if args.command == "periods":
            cmd_periods(config)
        elif args.command == "spectrum":
            cmd_spectrum(config)
        elif args.command == "eigenfunction":
            cmd_eigenfunction(config, args.ell, args.m, args.n, args.base, args.samples)
        elif args.command == "phase-portrait":
            cmd_phase_portrait(config)
        elif args.command == "verify":
            return 0 if cmd_verify(config)["passed"] else 1
    except (UnresolvedIndex, DomainError) as exc:
        _log(f"error: {exc}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``thermoflow <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import report as rep
from .checkpoint import save_checkpoint
from .config import ConfigError, load_config
from .dns import (BlowUpError, SolverConfig, Simulation, advective_dt, init_from_eigenmode, init_random,
                  stable_dt)
from .experiments import DESK, critical_report, run_mc_sweep, verify
from .linear import critical_search, eigenvalues, eigenvector
from .manifold import bifurcated_state, bifurcation_coefficient, count_cells, ring_radius, stream_function
from .params import nondimensionalize


def _pair(text: str, kind=int):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    return tuple(kind(p) for p in parts)


def _range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected START:STOP:STEPS, got {text!r}")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise argparse.ArgumentTypeError("STEPS must be >= 1")
    return np.linspace(a, b, n) if n > 1 else np.array([a])


def _dimensionless(args):
    if getattr(args, "config", None):
        p = load_config(args.config)
        return p, nondimensionalize(p)
    return None, DESK


def cmd_critical(args) -> int:
    p = load_config(args.config)
    out = critical_report(p, m_max=args.mmax)
    if args.json:
        print(rep.to_json(out))
    else:
        print(f"m_c = {out['m_c']}")
        print(f"R_c = {out['r_c']:.10g}")
        print(f"T_c = {out['t_c']:.10g} K")
        print(f"transversal_slope = {out['transversal_slope']:.6g}")
        for w in out["warnings"]:
            print(f"warning: {w}")
        for n in out["notes"]:
            print(f"note: {n}")
    return 0


def cmd_spectrum(args) -> int:
    p = load_config(args.config)
    d = nondimensionalize(p)
    rows = []
    for m in range(0, args.mmax + 1):
        for n in range(1, args.nmax + 1):
            e = eigenvalues(m, n, args.rayleigh, d)
            rows.append((m, n, float(e.a), float(e.A), float(e.B), float(e.C),
                         float(e.beta_plus), float(e.beta_minus)))
    path = rep.write_csv(args.csv, rep.SPECTRUM_COLUMNS, rows)
    top = max(rows, key=lambda r: r[6])
    print(f"wrote {len(rows)} modes to {path}; largest beta_plus={top[6]:.6g} at (m={top[0]}, n={top[1]})")
    return 0


def cmd_reduce(args) -> int:
    _, d = _dimensionless(args)
    d = d.with_sign(1)
    cp = critical_search(d.with_rayleigh(0.0))
    model = bifurcation_coefficient(d.with_rayleigh((1.0 + args.super_eps) * cp.r_c))
    out = {"m_c": model.m_c, "r_c": cp.r_c, "rayleigh": model.rayleigh, "beta": model.beta, "l": model.l,
           "a_mc": model.a_mc, "norm_sq": model.norm_sq, "l_literal": model.l_literal,
           "l_literal_alt": model.l_literal_alt}
    out["ring_radius"] = ring_radius(model) if model.beta > 0 else None
    if args.json:
        print(rep.to_json(out))
    else:
        print(f"beta = {model.beta:.10g}")
        print(f"l = {model.l:.10g}")
        print("ring radius = " + (f"{out['ring_radius']:.10g}" if out["ring_radius"] is not None
                                  else "none (beta <= 0)"))
    return 0


def cmd_cells(args) -> int:
    p, d = _dimensionless(args)
    d = d.with_sign(1)
    cp = critical_search(d.with_rayleigh(0.0))
    model = bifurcation_coefficient(d.with_rayleigh((1.0 + args.super_eps) * cp.r_c))
    sol = bifurcated_state(args.s1, args.s2, model)
    nx, nz = args.grid
    x = np.arange(nx) * d.alpha / nx
    z = np.linspace(0.0, 1.0, nz)
    psi = stream_function(sol).sample(x, z)
    cells = count_cells(psi, z)
    rows = [(xi, zj, psi[i, j]) for i, xi in enumerate(x) for j, zj in enumerate(z)]
    path = rep.write_csv(args.csv, ["x", "z", "psi"], rows)
    if args.plot_script:
        rep.gnuplot_contour(args.plot_script, Path(path).name, f"stream function, {cells} cells")
    print(f"cells = {cells}")
    return 0


def cmd_simulate(args) -> int:
    p, d = _dimensionless(args)
    M, N = args.modes
    cp = critical_search(d.with_sign(1).with_rayleigh(0.0))
    if args.rayleigh_factor is not None:
        d = d.with_sign(1).with_rayleigh(args.rayleigh_factor * cp.r_c)
    eig = eigenvector(cp.m_c, 1, "+", max(d.rayleigh, 1e-300), d.with_sign(1)) if cp.m_c <= M else None
    if args.init == "eigenmode":
        if eig is None:
            raise SystemExit("critical mode does not fit in the truncation")
        state = init_from_eigenmode(args.delta, eig, M, N)
    else:
        state = init_random(args.delta, args.seed, M, N, d.alpha)
    dt = args.dt if args.dt is not None else min(stable_dt(d, M, N), 0.5 * advective_dt(state), 0.01)
    cfg = SolverConfig(M, N, dt, args.tend, dealias=not args.no_dealias, diag_every=args.diag_every,
                       seed=args.seed, nonlinear=not args.linear)
    sim = Simulation(state, d, cfg, eig)
    status = 0
    try:
        sim.run()
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        status = 3
    outputs = []
    if args.csv:
        outputs.append(rep.write_timeseries(args.csv, sim.history))
    if args.checkpoint:
        outputs.append(save_checkpoint(sim.state, args.checkpoint))
    if args.csv:
        manifest = Path(args.csv).with_suffix(".manifest.json")
        inputs = {"params": d.__dict__, "config": cfg.__dict__, "init": args.init, "delta": args.delta}
        rep.write_manifest(manifest, "simulate", inputs, outputs,
                           {"t": sim.state.t, "final": sim.history[-1].as_dict()})
    last = sim.history[-1]
    print(f"t = {last.t:.6g}  l2 = {last.l2:.6g}  h1 = {last.h1:.6g}  x = ({last.x1:.6g}, {last.x2:.6g})")
    return status


def cmd_verify(args) -> int:
    _, d = _dimensionless(args)
    reports = verify(args.suite, d, out_dir=args.out)
    for r in reports:
        print(r.summary())
    return 0 if all(r.passed for r in reports) else 1


def cmd_sweep(args) -> int:
    r = run_mc_sweep(args.alpha, args.pra, args.kappa_a, m_max=args.mmax, out_dir=args.out)
    print(r.summary())
    for row in r.measured["table"]:
        print(" ".join(f"{v:4d}" for v in row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermoflow", description=__doc__)
    ap.add_argument("--version", action="version", version=f"thermoflow {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("critical", help="critical wavenumber, Rayleigh number and temperature")
    c.add_argument("--config", required=True)
    c.add_argument("--json", action="store_true")
    c.add_argument("--mmax", type=int, default=1000)
    c.set_defaults(func=cmd_critical)

    s = sub.add_parser("spectrum", help="tabulate beta+/- over modes")
    s.add_argument("--config", required=True)
    s.add_argument("--rayleigh", type=float, required=True)
    s.add_argument("--mmax", type=int, default=8)
    s.add_argument("--nmax", type=int, default=8)
    s.add_argument("--csv", required=True)
    s.set_defaults(func=cmd_spectrum)

    r = sub.add_parser("reduce", help="center-manifold coefficients and ring radius")
    r.add_argument("--config")
    r.add_argument("--super-eps", type=float, default=0.01)
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_reduce)

    e = sub.add_parser("cells", help="stream function of a bifurcated state and its cell count")
    e.add_argument("--config")
    e.add_argument("--super-eps", type=float, default=0.01)
    e.add_argument("--s1", type=float, required=True)
    e.add_argument("--s2", type=float, required=True)
    e.add_argument("--grid", type=_pair, default=(96, 49))
    e.add_argument("--csv", required=True)
    e.add_argument("--plot-script")
    e.set_defaults(func=cmd_cells)

    m = sub.add_parser("simulate", help="run the spectral simulator")
    m.add_argument("--config")
    m.add_argument("--modes", type=_pair, default=(16, 16))
    m.add_argument("--dt", type=float)
    m.add_argument("--tend", type=float, default=1.0)
    m.add_argument("--init", choices=["eigenmode", "random"], default="random")
    m.add_argument("--delta", type=float, default=1e-3)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--rayleigh-factor", type=float, help="override R as a multiple of R_c")
    m.add_argument("--diag-every", type=int, default=1)
    m.add_argument("--no-dealias", action="store_true")
    m.add_argument("--linear", action="store_true", help="drop the advection terms")
    m.add_argument("--csv")
    m.add_argument("--checkpoint")
    m.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the experiment suites")
    v.add_argument("--suite", choices=["subcritical", "critical", "supercritical", "ring", "all"], default="all")
    v.add_argument("--config")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="m_c over an (alpha, Pr_a) grid")
    w.add_argument("--alpha", type=_range, required=True)
    w.add_argument("--pra", type=_range, required=True)
    w.add_argument("--kappa-a", type=float, required=True)
    w.add_argument("--mmax", type=int, default=1000)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Scripted desk-scale experiments pairing simulator measurements with theory.

Each ``run_*`` function returns a :class:`RunReport` whose checks carry the
measured value, the predicted value and the tolerance used.  A failed check
marks the report as failing; it never raises.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report as rep
from .dns import (SolverConfig, Simulation, decay_rate_fit, first_crossing, init_from_eigenmode,
                  init_random, stable_dt)
from .linear import critical_search, critical_temperature, eigenvector
from .manifold import (AmplitudeState, bifurcated_state, bifurcation_coefficient, count_cells,
                       integrate_amplitudes, ring_radius, stream_function)
from .params import DimensionlessParams, PhysicalParams, nondimensionalize
from .spectral import SpectralState

__all__ = [
    "DESK",
    "REFERENCE_EXAMPLE",
    "Check",
    "RunReport",
    "ExperimentSpec",
    "critical_report",
    "run_subcritical_decay",
    "run_critical_decay",
    "run_supercritical_escape",
    "run_ring_attractor",
    "run_cell_figure",
    "run_mc_sweep",
    "verify",
]

DESK = DimensionlessParams(pr_x=1.0, pr_z=1.0, kappa_a=1.0, alpha=2.0)

# Worked example values as printed in the source material, used only for a comparison note.
REFERENCE_EXAMPLE = {
    "inputs": dict(T0=20.0, H=1000.0, L=50000.0, mu_x=1e4, mu_z=10.0, kappa_x=100.0,
                   kappa_z=1.0, rho0=1.2, beta=1e-4, g=9.8),
    "m_c": 2,
    "r_c": 41.4392,
    "t_c": 14.6021,
}

KINDS = ("subcritical_decay", "critical_decay", "supercritical_escape", "ring_attractor",
         "cell_figure", "mc_sweep")

DEFAULTS = {
    "subcritical_decay": dict(M=64, N=32, rayleigh_factor=0.5, delta=1e-6, t_end=1.0, dt_cap=0.01,
                              tolerances={"rate": 0.01, "monotone": 1e-12, "isothermal": 0.01}),
    "critical_decay": dict(M=12, N=12, rayleigh_factor=1.0, delta=2.0, t_end=None, dt_cap=0.004,
                           tolerances={"ratio": 0.5, "monotone": 1e-12, "neutral": 1e-4}),
    "supercritical_escape": dict(M=12, N=12, rayleigh_factor=1.1, delta=1e-8, epsilon=1e-5,
                                 t_end=10.0, dt_cap=0.002, tolerances={"escape": 0.10, "rate": 0.01}),
    "ring_attractor": dict(M=12, N=12, rayleigh_factor=1.01, amplitude=0.05, t_end=60.0, dt_cap=0.01,
                           tolerances={"radius": 0.15, "spread": 0.05, "angle": 0.05,
                                       "correlation": 0.9, "balance": 1e-3}),
    "cell_figure": dict(M=4, N=4, rayleigh_factor=1.01, tolerances={"correlation": 0.9}),
    "mc_sweep": dict(tolerances={"trend": 0.5}),
}


@dataclass
class Check:
    name: str
    measured: float
    predicted: float
    tolerance: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] {self.name}: measured={self.measured:.6g} predicted={self.predicted:.6g} "
                f"tol={self.tolerance:.3g}{' ' + self.note if self.note else ''}")


@dataclass
class RunReport:
    kind: str
    inputs: dict
    checks: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, measured, predicted, tolerance, passed, note="") -> Check:
        c = Check(name, float(measured), float(predicted), float(tolerance), bool(passed), note)
        self.checks.append(c)
        return c

    def summary(self) -> str:
        head = f"{self.kind}: {'PASS' if self.passed else 'FAIL'} ({self.wall_time:.1f} s)"
        return "\n".join([head] + ["  " + c.line() for c in self.checks] + ["  note: " + n for n in self.notes])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "inputs": self.inputs,
                "checks": [c.__dict__ for c in self.checks], "measured": self.measured,
                "predicted": self.predicted, "wall_time": self.wall_time,
                "outputs": [str(o) for o in self.outputs], "notes": self.notes}


@dataclass
class ExperimentSpec:
    kind: str
    params: DimensionlessParams = DESK
    M: int | None = None
    N: int | None = None
    dt: float | None = None
    t_end: float | None = None
    rayleigh_factor: float | None = None
    delta: float | None = None
    epsilon: float | None = None
    amplitude: float | None = None
    seeds: tuple = (1, 2, 3)
    tolerances: dict = field(default_factory=dict)
    out_dir: Path | None = None
    physical: PhysicalParams | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        merged = dict(DEFAULTS[self.kind].get("tolerances", {}))
        merged.update(self.tolerances)
        if any(not v > 0 for v in merged.values()):
            raise ValueError("tolerances must be positive")
        self.tolerances = merged

    def get(self, name):
        value = getattr(self, name, None) if name in self.__dataclass_fields__ else self.extra.get(name)
        return DEFAULTS[self.kind].get(name) if value is None else value

    def echo(self) -> dict:
        out = {k: getattr(self, k) for k in ("kind", "M", "N", "dt", "t_end", "rayleigh_factor",
                                              "delta", "epsilon", "amplitude", "seeds")}
        out["params"] = self.params.__dict__
        out["tolerances"] = self.tolerances
        out["resolved"] = {k: v for k, v in DEFAULTS[self.kind].items() if k != "tolerances"}
        return out


def _choose_dt(spec: ExperimentSpec, d: DimensionlessParams, M: int, N: int) -> float:
    if spec.dt is not None:
        return spec.dt
    return min(stable_dt(d, M, N), spec.get("dt_cap"))


def _emit(spec: ExperimentSpec, report: RunReport, name: str, history) -> None:
    if spec.out_dir is None:
        return
    path = rep.write_timeseries(Path(spec.out_dir) / f"{name}.csv", history)
    report.outputs.append(path)


def _finish(spec: ExperimentSpec, report: RunReport, t0: float) -> RunReport:
    report.wall_time = time.perf_counter() - t0
    if spec.out_dir is not None:
        out = Path(spec.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        manifest = rep.write_manifest(out / f"{report.kind}.manifest.json", report.kind, report.inputs,
                                      report.outputs, report.to_dict())
        report.outputs.append(manifest)
    return report


# -- critical data --------------------------------------------------------------------

def _matches_reference(p: PhysicalParams) -> bool:
    ref = REFERENCE_EXAMPLE["inputs"]
    return all(math.isclose(getattr(p, k), v, rel_tol=1e-9) for k, v in ref.items())


def critical_report(p: PhysicalParams, m_max: int = 1000) -> dict:
    """Critical wavenumber, Rayleigh number and temperature for physical inputs."""
    cp = critical_temperature(p, m_max=m_max)
    d = nondimensionalize(p)
    out = {"m_c": cp.m_c, "r_c": cp.r_c, "t_c": cp.t_c, "transversal_slope": cp.transversal_slope,
           "truncated": cp.truncated, "n1_minimal": cp.n1_minimal, "warnings": list(cp.warnings),
           "dimensionless": {"pr_x": d.pr_x, "pr_z": d.pr_z, "kappa_a": d.kappa_a, "alpha": d.alpha,
                             "pr_a": d.pr_a, "rayleigh": d.rayleigh, "sign": d.sign},
           "notes": []}
    if _matches_reference(p):
        ref = REFERENCE_EXAMPLE
        if cp.m_c != ref["m_c"] or not math.isclose(cp.r_c, ref["r_c"], rel_tol=1e-4):
            out["notes"].append(
                f"discrepancy: the reference worked example lists m_c={ref['m_c']}, R_c={ref['r_c']}, "
                f"T_c={ref['t_c']} for these inputs; direct minimisation gives m_c={cp.m_c}, "
                f"R_c={cp.r_c:.6g}, T_c={cp.t_c:.6g}. The listed (R_c, T_c) pair satisfies the "
                f"R^2 <-> dT conversion, but not the minimisation at these dimensionless groups.")
    return out


# -- subcritical ----------------------------------------------------------------------

def run_subcritical_decay(spec: ExperimentSpec) -> RunReport:
    t0 = time.perf_counter()
    report = RunReport(spec.kind, spec.echo())
    tol = spec.tolerances
    base = spec.params
    M, N = spec.get("M"), spec.get("N")
    if base.sign == 1:
        cp = critical_search(base.with_rayleigh(0.0))
        factor = spec.get("rayleigh_factor")
        if not factor < 1.0:
            raise ValueError("subcritical decay needs rayleigh_factor < 1 when heated from below")
        d = base.with_rayleigh(factor * cp.r_c)
        eig = eigenvector(cp.m_c, 1, "+", d.rayleigh, d)
        delta = spec.get("delta")
        t_end = spec.get("t_end")
        dt = _choose_dt(spec, d, M, N)
        sim = Simulation(init_from_eigenmode(delta, eig, M, N), d,
                         SolverConfig(M, N, dt, t_end, diag_every=1), eig)
        sim.run()
        t, l2 = sim.series("l2")
        window = (0.1 * t_end, t_end)
        fit = decay_rate_fit(t, l2, window)
        rel = abs(fit.rate - eig.beta) / abs(eig.beta)
        report.add("l2_decay_rate", fit.rate, eig.beta, tol["rate"], rel <= tol["rate"],
                   f"window={window} r2={fit.r_squared:.8f}")
        sel = t >= window[0]
        for name in ("l2", "h1", "h2"):
            _, y = sim.series(name)
            y = y[sel]
            worst = float(np.max(np.diff(y) / y[:-1])) if y.size > 1 else -1.0
            report.add(f"{name}_monotone_after_transient", worst, 0.0, tol["monotone"],
                       worst <= tol["monotone"], "largest relative step increase")
        report.measured.update(rate=fit.rate, r_squared=fit.r_squared, dt=dt)
        report.predicted.update(beta_plus=eig.beta, r_c=cp.r_c, m_c=cp.m_c)
        _emit(spec, report, "subcritical_eigenmode", sim.history)

    # isothermal layer: temperature decoupled from velocity, slowest rate kappa_a pi^2
    iso = base.with_sign(0).with_rayleigh(0.0)
    Mi = Ni = 12
    dti = min(stable_dt(iso, Mi, Ni), 0.01)
    sim = Simulation(init_random(1e-3, spec.seeds[0], Mi, Ni, iso.alpha), iso,
                     SolverConfig(Mi, Ni, dti, 3.0, diag_every=5))
    sim.run()
    t, lt = sim.series("l2_theta")
    fit = decay_rate_fit(t, lt, (1.5, 3.0))
    bound = math.pi**2 * min(1.0, iso.kappa_a)
    report.add("isothermal_theta_rate", -fit.rate, bound, tol["isothermal"],
               -fit.rate >= bound * (1.0 - tol["isothermal"]), "decay rate must not fall below the bound")
    _emit(spec, report, "subcritical_isothermal", sim.history)

    # zero data stays zero
    d0 = base.with_rayleigh(0.5 * critical_search(base.with_rayleigh(0.0)).r_c) if base.sign == 1 else iso
    zsim = Simulation(SpectralState.zeros(4, 4, base.alpha), d0, SolverConfig(4, 4, 1e-3, 0.02))
    zsim.run()
    biggest = max(max(h.l2, h.h1, h.h2) for h in zsim.history)
    report.add("zero_data_stays_zero", biggest, 0.0, 1e-300, biggest == 0.0)
    return _finish(spec, report, t0)


# -- critical -------------------------------------------------------------------------

def run_critical_decay(spec: ExperimentSpec) -> RunReport:
    """Decay at R = R_c from data on the center manifold.

    Without a linear rate the decay is algebraic, r^2 = r0^2 / (1 - 2 l r0^2 t),
    so the horizon is chosen from the amplitude equation: t_end = 3 / (|l| delta^2)
    gives an expected H1 ratio near 1/sqrt(7).
    """
    t0 = time.perf_counter()
    report = RunReport(spec.kind, spec.echo())
    tol = spec.tolerances
    base = spec.params
    cp = critical_search(base.with_rayleigh(0.0))
    d = base.with_rayleigh(cp.r_c)
    model = bifurcation_coefficient(d)
    M, N = spec.get("M"), spec.get("N")
    delta = spec.get("delta")
    t_end = spec.t_end or 3.0 / (abs(model.l) * delta**2)
    dt = _choose_dt(spec, d, M, N)

    init = bifurcated_state(delta, 0.0, model, M=M, N=N).state.enforce()
    sim = Simulation(init, d, SolverConfig(M, N, dt, t_end, diag_every=1), model.eig)
    sim.run()
    t, h1 = sim.series("h1")
    worst = float(np.max(np.diff(h1) / h1[:-1]))
    ratio = float(h1[-1] / h1[0])
    predicted_ratio = 1.0 / math.sqrt(1.0 - 2.0 * model.l * delta**2 * t_end)
    report.add("h1_non_increasing", worst, 0.0, tol["monotone"], worst <= tol["monotone"],
               "largest relative step increase")
    report.add("h1_terminal_ratio", ratio, predicted_ratio, tol["ratio"], ratio < tol["ratio"],
               f"horizon t_end={t_end:.4g}; prediction from the amplitude equation")
    invariant_ok = sim.state.satisfies_invariants(0.0)
    report.add("invariants_hold", 0.0 if invariant_ok else 1.0, 0.0, 1e-300, invariant_ok)
    _emit(spec, report, "critical_manifold", sim.history)

    # bare eigenmode start: H1 first rises while the sin(2 pi z) correction builds up
    bare = Simulation(init_from_eigenmode(delta, model.eig, M, N), d,
                      SolverConfig(M, N, dt, min(1.0, t_end), diag_every=1), model.eig)
    bare.run()
    _, hb = bare.series("h1")
    report.measured["bare_eigenmode_h1_peak_ratio"] = float(hb.max() / hb[0])
    report.notes.append("an unlifted eigenmode start shows a transient H1 rise of "
                        f"{(hb.max() / hb[0] - 1):.2e} (relative) before decaying")

    # linearised dynamics: the neutral mode keeps its amplitude
    lin = Simulation(init_from_eigenmode(1.0, model.eig, M, N), d,
                     SolverConfig(M, N, dt, 1.0, diag_every=10, nonlinear=False), model.eig)
    lin.run()
    drift = abs(lin.history[-1].l2 / lin.history[0].l2 - 1.0)
    report.add("linear_neutral_amplitude_drift", drift, 0.0, tol["neutral"], drift <= tol["neutral"])

    # random data keeps the invariants
    rnd = Simulation(init_random(0.1, spec.seeds[0], M, N, d.alpha), d,
                     SolverConfig(M, N, dt, 0.5, diag_every=25), model.eig)
    rnd.run()
    ok = rnd.state.satisfies_invariants(0.0)
    report.add("random_invariants_hold", 0.0 if ok else 1.0, 0.0, 1e-300, ok)

    report.measured.update(h1_ratio=ratio, t_end=t_end, dt=dt)
    report.predicted.update(l=model.l, h1_ratio=predicted_ratio, r_c=cp.r_c)
    return _finish(spec, report, t0)


# -- supercritical ----------------------------------------------------------------------

def run_supercritical_escape(spec: ExperimentSpec) -> RunReport:
    t0 = time.perf_counter()
    report = RunReport(spec.kind, spec.echo())
    tol = spec.tolerances
    base = spec.params
    cp = critical_search(base.with_rayleigh(0.0))
    factor = spec.get("rayleigh_factor")
    if not factor > 1.0:
        raise ValueError("supercritical escape needs rayleigh_factor > 1")
    d = base.with_rayleigh(factor * cp.r_c)
    model = bifurcation_coefficient(d)
    eig = model.eig
    delta, eps = spec.get("delta"), spec.get("epsilon")
    if not delta <= eps:
        raise ValueError("need delta <= epsilon")
    ring = ring_radius(model)
    linear_regime = eps <= 1e3 * delta and eps < ring
    if not linear_regime:
        report.notes.append("epsilon outside the linear-dominated range; comparison is indicative only")
    M, N = spec.get("M"), spec.get("N")
    dt = _choose_dt(spec, d, M, N)
    predicted = math.log(eps / delta) / eig.beta
    t_end = max(spec.get("t_end"), 3.0 * predicted)
    sim = Simulation(init_from_eigenmode(delta, eig, M, N), d, SolverConfig(M, N, dt, t_end), eig)
    sim.run(stop=lambda h: h.l2 >= eps)
    t, l2 = sim.series("l2")
    measured = first_crossing(t, l2, eps)
    if measured is None:
        report.add("escape_time", float("nan"), predicted, tol["escape"], False,
                   f"norm never reached epsilon before t={t[-1]:.4g}")
    else:
        rel = abs(measured - predicted) / predicted if predicted > 0 else abs(measured)
        report.add("escape_time", measured, predicted, tol["escape"], rel <= tol["escape"])
        if measured > 0.2:
            fit = decay_rate_fit(t, l2, (0.1 * measured, measured))
            rel_rate = abs(fit.rate - eig.beta) / eig.beta
            report.add("linear_growth_rate", fit.rate, eig.beta, tol["rate"], rel_rate <= tol["rate"])
            report.measured["growth_rate"] = fit.rate
    immediate = first_crossing([0.0, dt], [delta, delta], delta)
    report.add("delta_equals_epsilon_immediate", immediate, 0.0, 1e-300, immediate == 0.0)
    report.measured.update(escape_time=measured, dt=dt)
    report.predicted.update(escape_time=predicted, beta_plus=eig.beta)
    _emit(spec, report, "supercritical_escape", sim.history)
    return _finish(spec, report, t0)


# -- ring attractor ---------------------------------------------------------------------

def _stream_correlation(a, b, nx: int = 64, nz: int = 33) -> float:
    alpha = a.state.alpha if hasattr(a, "state") else a.alpha
    x = np.arange(nx) * alpha / nx
    z = np.linspace(0.0, 1.0, nz)
    fa = stream_function(a).sample(x, z)
    fb = stream_function(b).sample(x, z)
    den = math.sqrt(float(np.sum(fa * fa) * np.sum(fb * fb)))
    return float(np.sum(fa * fb) / den) if den > 0 else 0.0


def _cells_of(state, nx: int = 128) -> int:
    x = np.arange(nx) * state.alpha / nx
    return count_cells(stream_function(state).sample(x, [0.5])[:, 0])


def run_ring_attractor(spec: ExperimentSpec) -> RunReport:
    t0 = time.perf_counter()
    report = RunReport(spec.kind, spec.echo())
    tol = spec.tolerances
    base = spec.params
    cp = critical_search(base.with_rayleigh(0.0))
    eps_s = spec.get("rayleigh_factor") - 1.0
    if not 0.0 < eps_s <= 0.05:
        raise ValueError("ring experiment needs R = (1 + eps) R_c with 0 < eps <= 0.05")
    d = base.with_rayleigh((1.0 + eps_s) * cp.r_c)
    model = bifurcation_coefficient(d)
    predicted = ring_radius(model)
    M, N = spec.get("M"), spec.get("N")
    dt = _choose_dt(spec, d, M, N)
    t_end = spec.get("t_end")
    amp = spec.get("amplitude")
    radii, angles, cells, corrs, balances = [], [], [], [], []
    for seed in spec.seeds:
        sim = Simulation(init_random(amp, seed, M, N, d.alpha), d,
                         SolverConfig(M, N, dt, t_end, diag_every=10, seed=seed), model.eig)
        sim.run()
        t, x1 = sim.series("x1")
        _, x2 = sim.series("x2")
        tail = t >= 0.8 * t_end
        r = float(np.mean(np.hypot(x1[tail], x2[tail])))
        radii.append(r)
        angles.append(float(math.atan2(x2[-1], x1[-1])))
        cells.append(_cells_of(sim.state))
        lead = bifurcated_state(float(x1[-1]), float(x2[-1]), model, M=M, N=N)
        corrs.append(_stream_correlation(sim.state, lead))
        balances.append(sim.history[-1].steady_balance)
        rel = abs(r - predicted) / predicted
        report.add(f"ring_radius_seed{seed}", r, predicted, tol["radius"], rel <= tol["radius"])
        report.add(f"cell_count_seed{seed}", cells[-1], 2 * model.m_c, 0.5, cells[-1] == 2 * model.m_c)
        report.add(f"stream_correlation_seed{seed}", corrs[-1], 1.0, tol["correlation"],
                   corrs[-1] > tol["correlation"])
        report.add(f"steady_balance_seed{seed}", balances[-1], 0.0, tol["balance"], balances[-1] < tol["balance"])
        _emit(spec, report, f"ring_seed{seed}", sim.history)
    if len(radii) > 1:
        spread = max(abs(a - b) / max(a, b) for i, a in enumerate(radii) for b in radii[i + 1:])
        report.add("ring_radius_spread", spread, 0.0, tol["spread"], spread <= tol["spread"])
        sep = min(abs(math.remainder(a - b, 2 * math.pi)) for i, a in enumerate(angles) for b in angles[i + 1:])
        report.add("ring_angle_separation", sep, 0.0, tol["angle"], sep > tol["angle"],
                   "smallest pairwise angle difference, must exceed tolerance")
    surrogate = integrate_amplitudes(AmplitudeState(amp, 0.0), model, 0.01, 40.0 / model.beta, every=1000)
    rel = abs(surrogate.terminal_radius - predicted) / predicted
    report.add("amplitude_surrogate_radius", surrogate.terminal_radius, predicted, 1e-6, rel <= 1e-6)
    report.measured.update(radii=radii, angles=angles, cells=cells, correlations=corrs, dt=dt)
    report.predicted.update(ring_radius=predicted, beta=model.beta, l=model.l, cells=2 * model.m_c,
                            ring_radius_literal=math.sqrt(-model.beta / model.l_literal))
    return _finish(spec, report, t0)


# -- cell figure ------------------------------------------------------------------------

def run_cell_figure(spec: ExperimentSpec) -> RunReport:
    t0 = time.perf_counter()
    report = RunReport(spec.kind, spec.echo())
    base = spec.params
    cp = critical_search(base.with_rayleigh(0.0))
    d = base.with_rayleigh(spec.get("rayleigh_factor") * cp.r_c)
    model = bifurcation_coefficient(d)
    r = ring_radius(model)
    s1 = spec.extra.get("s1", r)
    s2 = spec.extra.get("s2", 0.0)
    M, N = spec.get("M"), spec.get("N")
    sol = bifurcated_state(s1, s2, model, p=spec.physical, M=M, N=N)
    psi = stream_function(sol)
    nx, nz = spec.extra.get("grid", (96, 49))
    x = np.arange(nx) * d.alpha / nx
    z = np.linspace(0.0, 1.0, nz)
    grid = psi.sample(x, z)
    count = count_cells(grid, z)
    report.add("cell_count", count, 2 * model.m_c, 0.5, count == 2 * model.m_c)
    counts = []
    for k, (a, b) in enumerate([(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)], 1):
        c = count_cells(stream_function(bifurcated_state(a, b, model, M=M, N=N)).sample(x, z), z)
        counts.append(c)
        report.add(f"cell_count_s{k}", c, 2 * model.m_c, 0.5, c == 2 * model.m_c)
    dns_state = spec.extra.get("dns_state")
    if dns_state is not None:
        corr = _stream_correlation(dns_state, sol)
        report.add("dns_stream_correlation", corr, 1.0, spec.tolerances["correlation"],
                   corr > spec.tolerances["correlation"])
    if spec.out_dir is not None:
        out = Path(spec.out_dir)
        rows = [(xi, zj, grid[i, j]) for i, xi in enumerate(x) for j, zj in enumerate(z)]
        path = rep.write_csv(out / "stream_function.csv", ["x", "z", "psi"], rows)
        report.outputs.append(path)
        report.outputs.append(rep.gnuplot_contour(out / "stream_function.gp", path.name,
                                                  f"stream function, {count} cells"))
    report.measured.update(cells=count, ring_point_cells=counts, s1=s1, s2=s2)
    report.predicted.update(cells=2 * model.m_c)
    return _finish(spec, report, t0)


# -- m_c sweep --------------------------------------------------------------------------

def run_mc_sweep(alphas, pras, kappa_a: float, m_max: int = 1000, out_dir=None,
                 tolerances: dict | None = None) -> RunReport:
    """m_c over an (alpha, Pr_a) grid; reports a monotonicity trend in alpha."""
    t0 = time.perf_counter()
    alphas = [float(a) for a in alphas]
    pras = [float(p) for p in pras]
    if any(a <= 0 for a in alphas) or any(p <= 0 for p in pras) or kappa_a <= 0:
        raise ValueError("grid bounds must be positive")
    tol = {"trend": 0.5, **(tolerances or {})}
    report = RunReport("mc_sweep", {"alphas": alphas, "pras": pras, "kappa_a": kappa_a, "m_max": m_max})
    rows, table = [], np.zeros((len(pras), len(alphas)), int)
    truncated = 0
    for i, pa in enumerate(pras):
        for j, a in enumerate(alphas):
            d = DimensionlessParams(pr_x=1.0, pr_z=pa, kappa_a=kappa_a, alpha=a)
            cp = critical_search(d, m_max=m_max, n_max=1)
            table[i, j] = cp.m_c
            truncated += int(cp.truncated)
            rows.append((a, pa, kappa_a, cp.m_c, cp.r_c, int(cp.truncated)))
    pairs = good = 0
    order = np.argsort(alphas)
    for i in range(len(pras)):
        col = table[i, order]
        for j in range(1, len(col)):
            pairs += 1
            good += int(col[j - 1] <= col[j])
    trend = good / pairs if pairs else 1.0
    report.add("mc_nonincreasing_as_alpha_decreases", trend, 1.0, tol["trend"], trend >= tol["trend"],
               "fraction of adjacent alpha pairs; trend statistic only")
    report.measured.update(table=table.tolist(), truncated_points=truncated, trend_fraction=trend)
    if truncated:
        report.notes.append(f"{truncated} grid points hit m_max={m_max}")
    if out_dir is not None:
        out = Path(out_dir)
        path = rep.write_csv(out / "mc_sweep.csv", ["alpha", "pr_a", "kappa_a", "m_c", "r_c", "truncated"], rows)
        report.outputs.append(path)
        report.outputs.append(rep.gnuplot_contour(out / "mc_sweep.gp", path.name, "critical m_c",
                                                  xcol=1, zcol=2, fcol=4))
        report.wall_time = time.perf_counter() - t0
        report.outputs.append(rep.write_manifest(out / "mc_sweep.manifest.json", "mc_sweep", report.inputs,
                                                 report.outputs, report.to_dict()))
    report.wall_time = time.perf_counter() - t0
    return report


RUNNERS = {
    "subcritical": ("subcritical_decay", run_subcritical_decay),
    "critical": ("critical_decay", run_critical_decay),
    "supercritical": ("supercritical_escape", run_supercritical_escape),
    "ring": ("ring_attractor", run_ring_attractor),
}


def verify(suite: str, params: DimensionlessParams = DESK, out_dir=None, **overrides) -> list:
    names = list(RUNNERS) if suite == "all" else [suite]
    reports = []
    for name in names:
        if name not in RUNNERS:
            raise ValueError(f"unknown suite {name!r}")
        kind, runner = RUNNERS[name]
        sub = Path(out_dir) / name if out_dir is not None else None
        reports.append(runner(ExperimentSpec(kind, params=params.with_sign(1), out_dir=sub, **overrides)))
    return reports

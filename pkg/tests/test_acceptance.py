"""Acceptance suite: one PASS/FAIL line per criterion, printed to the terminal.

Run with ``pytest tests/test_acceptance.py -v -s`` (or plain ``pytest``: lines
are printed with output capture disabled).
"""

import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from thermoflow.dns import Simulation, SolverConfig, diagnostics, init_random
from thermoflow.experiments import DESK, critical_report, verify
from thermoflow.linear import critical_search, dense_oracle_spectrum, eigenvalues, mode_matrix
from thermoflow.manifold import (AmplitudeState, bifurcation_coefficient, integrate_amplitudes,
                                 manifold_residual, oracle_bifurcation_coefficient, radial_closed_form,
                                 ring_radius)
from thermoflow.params import DimensionlessParams, PhysicalParams, nondimensionalize
from thermoflow.spectral import SpectralState, embed_real_mode

RC = 2 * math.pi**2


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail, elapsed, limit):
        flag = "PASS" if passed and elapsed < limit else "FAIL"
        with capsys.disabled():
            print(f"\n[{flag}] criterion {number}: {title}: {detail} ({elapsed:.2f} s, limit {limit:g} s)")
        return flag == "PASS"
    return emit


def _random_params(rng, n):
    out = []
    for _ in range(n):
        pr_x, pr_z, ka = np.exp(rng.uniform(np.log(0.1), np.log(10.0), 3))
        alpha = rng.uniform(0.5, 8.0)
        out.append(DimensionlessParams(pr_x, pr_z, ka, alpha))
    return out


def test_criterion_01_spectrum_vs_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for d in _random_params(rng, 50):
        R = rng.uniform(0.0, 2.0) * critical_search(d, m_max=64).r_c
        for m in range(-8, 9):
            oracle = np.sort(dense_oracle_spectrum(R, d, m, 8).real)
            e = eigenvalues(m, np.arange(1, 9), R, d)
            closed = np.sort(np.concatenate([e.beta_plus, e.beta_minus]))
            worst = max(worst, float(np.max(np.abs(oracle - closed))))
    elapsed = time.perf_counter() - t0
    ok = report(1, "closed-form beta vs dense oracle", worst <= 1e-8,
                f"max abs diff {worst:.2e} over 50 parameter sets, |m|<=8, n<=8 (tol 1e-8)", elapsed, 10)
    assert ok


def test_criterion_02_criticality(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_beta, worst_tc, min_slope = 0.0, 0.0, math.inf
    for _ in range(20):
        p = PhysicalParams(T0=1.0 + rng.uniform(0, 10), T1=0.0, H=rng.uniform(10, 2000),
                           L=rng.uniform(100, 1e5), mu_x=10 ** rng.uniform(0, 4), mu_z=10 ** rng.uniform(-1, 2),
                           kappa_x=10 ** rng.uniform(0, 3), kappa_z=10 ** rng.uniform(-1, 1),
                           rho0=rng.uniform(0.5, 2), beta=10 ** rng.uniform(-5, -3), g=9.8)
        out = critical_report(p)
        d = nondimensionalize(p)
        worst_beta = max(worst_beta, abs(eigenvalues(out["m_c"], 1, out["r_c"], d).beta_plus))
        tc = out["r_c"] ** 2 * p.kappa_x**2 / (p.H**3 * p.rho0 * p.g * p.beta)
        worst_tc = max(worst_tc, abs(out["t_c"] / tc - 1))
        min_slope = min(min_slope, out["transversal_slope"])
    ex = PhysicalParams(T0=20.0, T1=5.3979, H=1000.0, L=50000.0, mu_x=1e4, mu_z=10.0, kappa_x=100.0,
                        kappa_z=1.0, rho0=1.2, beta=1e-4, g=9.8)
    eo = critical_report(ex)
    tc = eo["r_c"] ** 2 * ex.kappa_x**2 / (ex.H**3 * ex.rho0 * ex.g * ex.beta)
    worst_tc = max(worst_tc, abs(eo["t_c"] / tc - 1))
    note = bool(eo["notes"]) and "discrepancy" in eo["notes"][0]
    elapsed = time.perf_counter() - t0
    passed = worst_beta <= 1e-9 and min_slope > 0 and worst_tc <= 1e-9 and note
    ok = report(2, "criticality self-consistency", passed,
                f"|beta+(R_c)| {worst_beta:.1e}, min slope {min_slope:.3g}, T_c identity {worst_tc:.1e}; "
                f"example m_c={eo['m_c']} R_c={eo['r_c']:.6g} T_c={eo['t_c']:.6g}, note emitted={note}",
                elapsed, 1)
    assert ok


def _linear_error(m, n, steps, d):
    M, N = max(4, abs(m)), max(4, n)
    s = SpectralState.zeros(M, N, d.alpha)
    embed_real_mode(s.v_hat, m, n, 0.3 + 0.1j)
    embed_real_mode(s.theta_hat, m, n, -0.2 + 0.4j)
    s.enforce()
    u0 = np.array([s.v_hat[M + m, n], s.theta_hat[M + m, n]])
    # horizon of two e-foldings of the slowest branch, so the mode has not decayed to round-off
    t_end = min(0.5, 2.0 / abs(eigenvalues(m, n, d.rayleigh, d).beta_plus))
    sim = Simulation(s, d, SolverConfig(M, N, t_end / steps, t_end, nonlinear=False))
    sim.run()
    exact = expm(mode_matrix(m, n, d) * t_end) @ u0
    got = np.array([sim.state.v_hat[M + m, n], sim.state.theta_hat[M + m, n]])
    return float(np.max(np.abs(got - exact)) / np.max(np.abs(exact)))


def test_criterion_03_linear_dns(report):
    t0 = time.perf_counter()
    d = DESK.with_rayleigh(1.1 * RC)
    orders = []
    for m, n in [(1, 1), (2, 1), (1, 2), (0, 1), (3, 2)]:
        e = [_linear_error(m, n, steps, d) for steps in (100, 200, 400)]
        orders.append(min(math.log2(e[0] / e[1]), math.log2(e[1] / e[2])))
    elapsed = time.perf_counter() - t0
    ok = report(3, "linear DNS vs matrix exponential", min(orders) >= 1.8,
                f"observed orders {', '.join(f'{o:.2f}' for o in orders)} (need >= 1.8)", elapsed, 30)
    assert ok


def _final_residual(d, dt):
    s = init_random(0.5, 4, 6, 6, d.alpha)
    sim = Simulation(s, d, SolverConfig(6, 6, dt, 0.2))
    sim.run()
    return sim.history[-1].energy_residual, max(abs(h.cross_term) for h in sim.history)


def test_criterion_04_energy_identity(report):
    t0 = time.perf_counter()
    d = DESK.with_sign(-1).with_rayleigh(30.0)
    res, cross = zip(*[_final_residual(d, dt) for dt in (2e-3, 1e-3, 5e-4)])
    scale = diagnostics(init_random(0.5, 4, 6, 6, d.alpha), d).dissipation
    orders = [math.log2(res[i] / res[i + 1]) for i in range(2)]
    elapsed = time.perf_counter() - t0
    passed = max(cross) <= 1e-12 * scale and all(o > 1.5 for o in orders) and res[-1] < res[0]
    ok = report(4, "energy identity (heated from above)", passed,
                f"max |cross| {max(cross):.1e}; residuals {', '.join(f'{r:.2e}' for r in res)}; "
                f"orders {', '.join(f'{o:.2f}' for o in orders)}", elapsed, 60)
    assert ok


def _suite_line(number, title, suite, limit, report):
    t0 = time.perf_counter()
    (r,) = verify(suite, DESK)
    elapsed = time.perf_counter() - t0
    failed = [c.name for c in r.checks if not c.passed]
    key = ", ".join(f"{c.name}={c.measured:.5g}" for c in r.checks[:4])
    detail = key + (f"; failed: {', '.join(failed)}" if failed else "")
    return report(number, title, r.passed, detail, elapsed, limit), r


@pytest.mark.slow
def test_criterion_05_subcritical_decay(report):
    ok, r = _suite_line(5, "subcritical decay at 0.5 R_c", "subcritical", 120, report)
    assert ok, r.summary()


@pytest.mark.slow
def test_criterion_06_critical_decay(report):
    ok, r = _suite_line(6, "critical decay at R_c", "critical", 300, report)
    assert ok, r.summary()


@pytest.mark.slow
def test_criterion_07_supercritical_escape(report):
    ok, r = _suite_line(7, "supercritical escape at 1.1 R_c", "supercritical", 120, report)
    assert ok, r.summary()


@pytest.mark.slow
def test_criterion_08_ring_attractor(report):
    t0 = time.perf_counter()
    (r,) = verify("ring", DESK)
    elapsed = time.perf_counter() - t0
    m = r.measured
    detail = (f"radii {', '.join(f'{x:.4f}' for x in m['radii'])} vs {r.predicted['ring_radius']:.4f}; "
              f"cells {m['cells']}; min corr {min(m['correlations']):.4f}; "
              f"angles {', '.join(f'{a:.2f}' for a in m['angles'])}")
    failed = [c.name for c in r.checks if not c.passed]
    if failed:
        detail += f"; failed: {', '.join(failed)}"
    ok = report(8, "ring attractor at 1.01 R_c", r.passed, detail, elapsed, 600)
    assert ok, r.summary()


CENTER_SETS = [DESK, DimensionlessParams(1.5, 0.4, 0.8, 3.0), DimensionlessParams(0.6, 2.0, 0.3, 5.0),
               DimensionlessParams(3.0, 1.0, 2.0, 1.2), DimensionlessParams(1.0, 1.0, 1.0, 4.0)]


def test_criterion_09_center_manifold(report):
    t0 = time.perf_counter()
    worst_rel, worst_res, max_l = 0.0, 0.0, -math.inf
    structure = True
    for d in CENTER_SETS:
        model = bifurcation_coefficient(d)
        o = oracle_bifurcation_coefficient(d, M=2 * model.m_c + 1, N=5)
        worst_rel = max(worst_rel, abs(o["l"] / model.l - 1))
        c = model.coeffs
        structure &= bool(np.all(c.g12.theta_hat == 0) and np.array_equal(c.g11.theta_hat, c.g22.theta_hat))
        structure &= math.sqrt(o["g12"].dot(o["g12"])) < 1e-10
        worst_res = max(worst_res, max(manifold_residual(model, d, M=2 * model.m_c + 1, N=5).values()))
    rng = np.random.default_rng(11)
    for d in _random_params(rng, 30):
        max_l = max(max_l, bifurcation_coefficient(d, m_max=64).l)
    elapsed = time.perf_counter() - t0
    passed = worst_rel <= 1e-6 and structure and max_l < 0
    ok = report(9, "center-manifold algebra", passed,
                f"oracle vs closed form rel {worst_rel:.1e} (tol 1e-6); g12=0, g11=g22: {structure}; "
                f"residual {worst_res:.1e}; max l over 30 random sets {max_l:.3g}", elapsed, 10)
    assert ok


@pytest.mark.xfail(strict=True, reason="literal closed-form coefficient disagrees with the oracle")
def test_criterion_09_literal_literal(report):
    t0 = time.perf_counter()
    model = bifurcation_coefficient(DESK)
    o = oracle_bifurcation_coefficient(DESK, M=3, N=5)
    rel = abs(o["l"] / model.l_literal - 1)
    elapsed = time.perf_counter() - t0
    ok = report("9-literal", "oracle vs literal closed-form coefficient", rel <= 1e-6,
                f"literal {model.l_literal:.6g}, oracle {o['l']:.6g}, rel {rel:.2e}", elapsed, 10)
    assert ok


def test_criterion_10_amplitude_ode(report):
    t0 = time.perf_counter()
    model = bifurcation_coefficient(DESK.with_rayleigh(1.01 * RC))
    dt = 0.01
    worst = 0.0
    for r0 in (0.05, 1.0, 4.0):
        tr = integrate_amplitudes(AmplitudeState(r0, 0.0), model, dt, 20.0)
        exact = radial_closed_form(r0, model.beta, model.l, tr.t)
        worst = max(worst, float(np.max(np.abs(tr.radius - exact) / exact)))
    long = integrate_amplitudes(AmplitudeState(0.05, 0.02), model, 0.05, 300.0, every=1000)
    terminal = abs(long.terminal_radius - ring_radius(model))
    elapsed = time.perf_counter() - t0
    # RK4 local error ~ dt^5 * |f^(5)|; 1e-7 relative covers dt = 0.01 here
    passed = worst <= 1e-7 and terminal <= 1e-8
    ok = report(10, "amplitude ODE", passed,
                f"max rel trajectory error {worst:.1e} (tol 1e-7 at dt=0.01); "
                f"|r_end - sqrt(-beta/l)| {terminal:.1e} (tol 1e-8)", elapsed, 1)
    assert ok

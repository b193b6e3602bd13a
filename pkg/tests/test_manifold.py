import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import cumulative_trapezoid

from thermoflow.dns import full_tendency
from thermoflow.manifold import (AmplitudeBlowUpError, AmplitudeState, DegenerateRingWarning, NoRingError,
                                 _project_stable, amplitude_rhs, bifurcated_state, bifurcation_coefficient,
                                 count_cells, integrate_amplitudes, manifold_residual,
                                 oracle_bifurcation_coefficient, radial_closed_form, ring_radius,
                                 stream_function)
from thermoflow.params import DimensionlessParams, PhysicalParams

PI = math.pi
DESK = DimensionlessParams(1.0, 1.0, 1.0, 2.0)
RC = 2 * PI**2

params = st.builds(
    DimensionlessParams,
    pr_x=st.floats(0.2, 5.0), pr_z=st.floats(0.2, 5.0), kappa_a=st.floats(0.2, 5.0),
    alpha=st.floats(0.8, 6.0))


@pytest.fixture(scope="module")
def model():
    return bifurcation_coefficient(DESK.with_rayleigh(1.01 * RC))


def test_desk_coefficient_at_threshold():
    m = bifurcation_coefficient(DESK)
    assert m.m_c == 1 and m.rayleigh == pytest.approx(RC)
    assert abs(m.beta) < 1e-12
    assert m.l == pytest.approx(-1.0 / 16.0, rel=1e-12)


def test_g_structure(model):
    c = model.coeffs
    assert np.all(c.g12.v_hat == 0) and np.all(c.g12.theta_hat == 0)
    np.testing.assert_array_equal(c.g11.theta_hat, c.g22.theta_hat)
    np.testing.assert_array_equal(c.g11.v_hat, 0.0)
    nz = np.argwhere(c.g11.theta_hat != 0)
    assert nz.tolist() == [[c.g11.M, 2]]


@pytest.mark.parametrize("d", [DESK, DimensionlessParams(1.5, 0.4, 0.8, 3.0),
                               DimensionlessParams(0.6, 2.0, 0.3, 5.0)])
def test_manifold_residual_small(d):
    m = bifurcation_coefficient(d.with_rayleigh(1.01 * bifurcation_coefficient(d).r_c))
    res = manifold_residual(m, d, M=2 * m.m_c + 1, N=5)
    assert max(res.values()) < 1e-9


@settings(max_examples=15, deadline=None)
@given(d=params)
def test_coefficient_negative(d):
    assert bifurcation_coefficient(d, m_max=64).l < 0


@pytest.mark.parametrize("d", [DESK, DimensionlessParams(1.5, 0.4, 0.8, 3.0),
                               DimensionlessParams(0.6, 2.0, 0.3, 5.0)])
def test_oracle_matches_closed_form(d):
    m = bifurcation_coefficient(d)
    o = oracle_bifurcation_coefficient(d, M=2 * m.m_c + 1, N=5)
    assert o["m_c"] == m.m_c
    assert o["l"] == pytest.approx(m.l, rel=1e-8)
    g = o["g11"].resized(m.m_c, 2)
    np.testing.assert_allclose(g.theta_hat, m.coeffs.g11.theta_hat, atol=1e-10)
    for name in ("g12",):
        assert math.sqrt(o[name].dot(o[name])) < 1e-10


def test_literal_forms_differ(model):
    assert model.l_literal < 0
    assert abs(model.l_literal / model.l - 1) > 0.5


def test_amplitude_fixed_points(model):
    assert amplitude_rhs(AmplitudeState(0.0, 0.0), model) == (0.0, 0.0)
    r = ring_radius(model)
    for ang in np.linspace(0, 2 * PI, 7):
        f = amplitude_rhs(AmplitudeState(r * math.cos(ang), r * math.sin(ang)), model)
        assert max(abs(f[0]), abs(f[1])) < 1e-12


@settings(max_examples=50, deadline=None)
@given(x1=st.floats(-3, 3), x2=st.floats(-3, 3), ang=st.floats(0, 2 * PI))
def test_amplitude_equivariance(x1, x2, ang):
    m = bifurcation_coefficient(DESK.with_rayleigh(1.05 * RC))
    c, s = math.cos(ang), math.sin(ang)
    f = np.array(amplitude_rhs(AmplitudeState(x1, x2), m))
    g = np.array(amplitude_rhs(AmplitudeState(c * x1 - s * x2, s * x1 + c * x2), m))
    np.testing.assert_allclose(g, [c * f[0] - s * f[1], s * f[0] + c * f[1]], atol=1e-12)
    h = np.array(amplitude_rhs(AmplitudeState(x1, -x2), m))
    np.testing.assert_allclose(h, [f[0], -f[1]], atol=1e-12)


@pytest.mark.parametrize("factor,r0", [(1.01, 0.3), (1.01, 4.0), (0.9, 0.5), (1.0, 0.5)])
def test_rk4_matches_closed_form(factor, r0):
    m = bifurcation_coefficient(DESK.with_rayleigh(factor * RC))
    dt = 0.01
    tr = integrate_amplitudes(AmplitudeState(r0 / math.sqrt(2), r0 / math.sqrt(2)), m, dt, 10.0)
    exact = radial_closed_form(r0, m.beta, m.l, tr.t)
    np.testing.assert_allclose(tr.radius, exact, rtol=1e-7)


def test_rk4_convergence_order(model):
    s0 = AmplitudeState(3.0, 0.0)
    exact = radial_closed_form(3.0, model.beta, model.l, 2.0)
    errs = [abs(integrate_amplitudes(s0, model, dt, 2.0).terminal_radius - exact) for dt in (0.04, 0.02)]
    assert math.log2(errs[0] / errs[1]) > 3.7


def test_rk4_approaches_ring(model):
    tr = integrate_amplitudes(AmplitudeState(0.1, 0.05), model, 0.05, 200.0, every=100)
    assert tr.terminal_radius == pytest.approx(ring_radius(model), rel=1e-6)


def test_rk4_guards(model):
    with pytest.raises(ValueError):
        integrate_amplitudes(AmplitudeState(0.1, 0.0), model, 0.0, 1.0)
    big = replace(model, beta=50.0)
    with pytest.raises(ValueError):
        integrate_amplitudes(AmplitudeState(0.1, 0.0), big, 0.01, 1.0)
    unstable = replace(model, l=0.5)
    with pytest.raises(AmplitudeBlowUpError):
        integrate_amplitudes(AmplitudeState(2.0, 0.0), unstable, 0.01, 100.0)
    with pytest.raises(ValueError):
        AmplitudeState(float("nan"), 0.0)


def test_ring_radius_cases(model):
    assert ring_radius(model) == pytest.approx(math.sqrt(-model.beta / model.l))
    assert ring_radius(model) == pytest.approx(1.786, abs=1e-3)
    with pytest.raises(NoRingError):
        ring_radius(bifurcation_coefficient(DESK.with_rayleigh(0.5 * RC)))
    with pytest.warns(DegenerateRingWarning):
        assert ring_radius(replace(model, beta=0.0)) == 0.0


def test_bifurcated_state_components(model):
    sol = bifurcated_state(0.3, -0.4, model, M=3, N=4)
    psi1, psi2 = model.eig.profiles(3, 4)
    g = model.coeffs.g11.resized(3, 4)
    assert sol.state.dot(psi1) == pytest.approx(0.3, abs=1e-12)
    assert sol.state.dot(psi2) == pytest.approx(-0.4, abs=1e-12)
    rest = sol.state + psi1.scaled(-0.3) + psi2.scaled(0.4)
    np.testing.assert_allclose(rest.theta_hat, 0.25 * g.theta_hat, atol=1e-15)
    assert sol.state.satisfies_invariants(1e-14)


def test_bifurcated_state_physical(model, example_physical):
    p = example_physical
    sol = bifurcated_state(0.3, 0.0, model, p=p)
    x, z, v, th = sol.sample(8, 5)
    x0, z0, v0, th0 = bifurcated_state(0.3, 0.0, model).sample(8, 5)
    np.testing.assert_allclose(x, x0 * p.H)
    np.testing.assert_allclose(v, v0 * p.kappa_x / p.H)


def test_stream_function_integrates_velocity(model):
    sol = bifurcated_state(0.7, 0.2, model, M=2, N=4)
    x = np.arange(16) * DESK.alpha / 16
    z = np.linspace(0.0, 1.0, 2001)
    v = sol.v_field.sample(x, z)
    psi = stream_function(sol).sample(x, z)
    np.testing.assert_allclose(psi, cumulative_trapezoid(v, z, axis=1, initial=0.0), atol=1e-6)
    assert np.max(np.abs(psi[:, 0])) < 1e-14 and np.max(np.abs(psi[:, -1])) < 1e-14


def test_stream_function_closed_form(model):
    # psi_1 velocity is V cos(pi z) cos(kx) up to the embedding factor
    sol = bifurcated_state(1.0, 0.0, model)
    x = np.linspace(0, 2, 9)[:-1]
    z = np.array([0.25, 0.5])
    v = sol.v_field.sample(x, np.array([0.0]))[:, 0]
    psi = stream_function(sol).sample(x, z)
    np.testing.assert_allclose(psi[:, 1], v / PI, atol=1e-14)


def test_stream_function_rejects_mean_velocity(model):
    sol = bifurcated_state(1.0, 0.0, model)
    sol.state.v_hat[sol.state.M, 0] = 1.0
    with pytest.raises(ValueError):
        stream_function(sol)


@pytest.mark.parametrize("d,cells", [(DESK, 2), (DimensionlessParams(1.0, 1.0, 1.0, 4.0), 4)])
def test_cell_count(d, cells):
    m = bifurcation_coefficient(d.with_rayleigh(1.01 * bifurcation_coefficient(d).r_c))
    assert m.m_c == cells // 2
    for s1, s2 in [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8)]:
        sol = bifurcated_state(s1, s2, m)
        x = np.arange(96) * d.alpha / 96
        z = np.linspace(0, 1, 49)
        assert count_cells(stream_function(sol).sample(x, z), z) == cells


def test_count_cells_edge_cases():
    assert count_cells(np.zeros(10)) == 0
    assert count_cells(np.ones(10)) == 1
    line = np.cos(2 * PI * 3 * np.arange(64) / 64 + 0.1)
    assert count_cells(line) == 6
    with pytest.raises(ValueError):
        count_cells(np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        count_cells(np.ones((4, 4)))


def _stable_residual(model, g_scale, s, M=3, N=6):
    d = DESK.with_rayleigh(model.rayleigh)
    psi1, psi2 = model.eig.profiles(M, N)
    g = model.coeffs.g11.resized(M, N).scaled(g_scale)
    u = psi1.scaled(s) + g.scaled(s * s)
    r = _project_stable(full_tendency(u, d), psi1, psi2) + g.scaled(-2.0 * model.beta * s * s)
    return math.sqrt(r.dot(r))


def _slope(model, g_scale):
    s = np.array([0.02, 0.01, 0.005])
    r = [_stable_residual(model, g_scale, x) for x in s]
    return np.polyfit(np.log(s), np.log(r), 1)[0]


def test_manifold_residual_is_cubic(model):
    assert _slope(model, 1.0) == pytest.approx(3.0, abs=0.1)


@pytest.mark.parametrize("scale", [0.5, "literal"])
def test_rescaled_g_leaves_quadratic_residual(model, scale):
    # 0.5 is the halved temperature coefficient; "literal" rescales g to the literal closed-form l
    g_scale = model.l_literal / model.l if scale == "literal" else scale
    assert _slope(model, g_scale) == pytest.approx(2.0, abs=0.1)

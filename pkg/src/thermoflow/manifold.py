"""Weakly nonlinear reduction near the first instability.

With psi_1, psi_2 the two real unit eigenfunctions of the critical mode, the
flow on the center manifold is u = x1 psi_1 + x2 psi_2 + (x1^2 + x2^2) g + ...,
and the amplitudes obey

    dx_i/dt = beta x_i + l x_i (x1^2 + x2^2).

Everything here is written for heating from below (sign = +1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linear import Eigenvector, critical_search, eigenvalues, eigenvector, mode_matrix
from .params import DimensionlessParams, PhysicalParams, temperature_scale
from .spectral import SpectralState, synthesize

__all__ = [
    "NoRingError",
    "DegenerateRingWarning",
    "AmplitudeBlowUpError",
    "ManifoldCoeffs",
    "ReducedModel",
    "AmplitudeState",
    "Trajectory",
    "BifurcationSolution",
    "Field",
    "manifold_coefficients",
    "bifurcation_coefficient",
    "amplitude_rhs",
    "integrate_amplitudes",
    "radial_closed_form",
    "ring_radius",
    "bifurcated_state",
    "stream_function",
    "count_cells",
    "quadrature_tendency",
    "manifold_residual",
    "oracle_bifurcation_coefficient",
]

PI = math.pi


class NoRingError(ValueError):
    """Raised when a ring radius is requested below threshold."""


class DegenerateRingWarning(UserWarning):
    pass


class AmplitudeBlowUpError(RuntimeError):
    pass


@dataclass
class ManifoldCoeffs:
    """Quadratic center-manifold coefficients as spectral states (m = 0, n = 2 only)."""

    g11: SpectralState
    g12: SpectralState
    g22: SpectralState
    theta_coefficient: float  # c in g11 = (0, c sin(2 pi z))


@dataclass
class ReducedModel:
    beta: float
    l: float
    a_mc: float
    norm_sq: float
    m_c: int
    alpha: float
    kappa_a: float
    rayleigh: float
    r_c: float
    eig: Eigenvector = field(repr=False)
    coeffs: ManifoldCoeffs = field(repr=False)
    # literal transcriptions kept for comparison only
    l_literal: float = float("nan")
    l_literal_alt: float = float("nan")

    @property
    def denominator(self) -> float:
        return 4.0 * self.kappa_a * PI**2 + 2.0 * self.beta


@dataclass
class AmplitudeState:
    x1: float
    x2: float
    t: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise ValueError("amplitudes must be finite")

    @property
    def radius(self) -> float:
        return math.hypot(self.x1, self.x2)


@dataclass
class Trajectory:
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray

    @property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x1, self.x2)

    @property
    def terminal_radius(self) -> float:
        return float(self.radius[-1])


@dataclass
class Field:
    """A real scalar field given by coefficients in the cos or sin vertical basis."""

    coeffs: np.ndarray
    basis: str
    alpha: float

    def sample(self, x, z) -> np.ndarray:
        return synthesize(self.coeffs, self.alpha, x, z, self.basis)


@dataclass
class BifurcationSolution:
    s1: float
    s2: float
    state: SpectralState
    physical: PhysicalParams | None = None

    @property
    def v_field(self) -> Field:
        return Field(self.state.v_hat, "cos", self.state.alpha)

    @property
    def theta_field(self) -> Field:
        return Field(self.state.theta_hat, "sin", self.state.alpha)

    def sample(self, nx: int, nz: int):
        """(x, z, v, Theta) on a uniform grid; dimensional when physicals are attached."""
        x = np.arange(nx) * self.state.alpha / nx
        z = np.linspace(0.0, 1.0, nz)
        v = self.v_field.sample(x, z)
        th = self.theta_field.sample(x, z)
        p = self.physical
        if p is None:
            return x, z, v, th
        return x * p.H, z * p.H, v * p.kappa_x / p.H, th * temperature_scale(p)


# -- closed-form reduction ----------------------------------------------------------------

def _critical_data(d: DimensionlessParams, m_max: int):
    if d.sign != 1:
        raise ValueError("the reduction is defined for heating from below (sign=+1)")
    cp = critical_search(d, m_max=m_max, n_max=1)
    R = d.rayleigh if d.rayleigh > 0 else cp.r_c
    eig = eigenvector(cp.m_c, 1, "+", R, d)
    return cp, R, eig


def manifold_coefficients(d: DimensionlessParams, eig: Eigenvector, N: int = 2) -> ManifoldCoeffs:
    """g11 = g22 = (0, c sin 2 pi z), g12 = 0."""
    denom = 4.0 * d.kappa_a * PI**2 + 2.0 * eig.beta
    if not denom > 0:
        raise ArithmeticError("resolvent denominator 4 kappa_a pi^2 + 2 beta is not positive")
    c = -eig.a_coefficient * eig.norm_sq * PI * eig.m / (d.alpha * denom)
    M = abs(eig.m)
    g11 = SpectralState.zeros(M, max(N, 2), d.alpha)
    g11.theta_hat[M, 2] = c
    g22 = g11.copy()
    g12 = SpectralState.zeros(M, max(N, 2), d.alpha)
    return ManifoldCoeffs(g11=g11, g12=g12, g22=g22, theta_coefficient=c)


def bifurcation_coefficient(d: DimensionlessParams, m_max: int = 256) -> ReducedModel:
    """Center-manifold data at the Rayleigh number stored in d (R_c when it is zero)."""
    cp, R, eig = _critical_data(d, m_max)
    coeffs = manifold_coefficients(d, eig)
    A, V2, m = eig.a_coefficient, eig.norm_sq, eig.m
    denom = 4.0 * d.kappa_a * PI**2 + 2.0 * eig.beta
    l = 0.5 * V2 * A * PI * m * coeffs.theta_coefficient
    l_lit = (16.0 - 3.0 * PI**2) * A**2 * m**2 * V2 / (12.0 * d.alpha * denom)
    l_lit_alt = 16.0 * (16.0 - 3.0 * PI**2) * A**2 * m**2 / (12.0 * d.alpha**3 * (1.0 + A**2) ** 2 * denom)
    return ReducedModel(beta=eig.beta, l=l, a_mc=A, norm_sq=V2, m_c=m, alpha=d.alpha,
                        kappa_a=d.kappa_a, rayleigh=R, r_c=cp.r_c, eig=eig, coeffs=coeffs,
                        l_literal=l_lit, l_literal_alt=l_lit_alt)


# -- amplitude equations ------------------------------------------------------------------

def amplitude_rhs(s: AmplitudeState, m: ReducedModel) -> tuple[float, float]:
    r2 = s.x1 * s.x1 + s.x2 * s.x2
    f = m.beta + m.l * r2
    return f * s.x1, f * s.x2


def _rhs_vec(x: np.ndarray, beta: float, l: float) -> np.ndarray:
    return (beta + l * (x[0] * x[0] + x[1] * x[1])) * x


def integrate_amplitudes(s0: AmplitudeState, m: ReducedModel, dt: float, t_end: float,
                         every: int = 1) -> Trajectory:
    """Classical RK4 with a fixed step; samples every ``every`` steps plus the end point."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt * abs(m.beta) >= 0.1:
        raise ValueError("dt*|beta| must be below 0.1")
    limit = 10.0 * max(1.0, math.sqrt(-m.beta / m.l) if m.beta > 0 and m.l < 0 else 0.0)
    nsteps = int(math.ceil((t_end - s0.t) / dt - 1e-9))
    x = np.array([s0.x1, s0.x2], float)
    ts, xs = [s0.t], [x.copy()]
    for i in range(1, nsteps + 1):
        k1 = _rhs_vec(x, m.beta, m.l)
        k2 = _rhs_vec(x + 0.5 * dt * k1, m.beta, m.l)
        k3 = _rhs_vec(x + 0.5 * dt * k2, m.beta, m.l)
        k4 = _rhs_vec(x + dt * k3, m.beta, m.l)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        r = math.hypot(x[0], x[1])
        if not math.isfinite(r) or r > limit:
            raise AmplitudeBlowUpError(f"amplitude radius {r} exceeded {limit} at t={s0.t + i * dt}")
        if i % every == 0 or i == nsteps:
            ts.append(s0.t + i * dt)
            xs.append(x.copy())
    xs = np.array(xs)
    return Trajectory(t=np.array(ts), x1=xs[:, 0], x2=xs[:, 1])


def radial_closed_form(r0: float, beta: float, l: float, t) -> np.ndarray:
    """Exact radius for dr/dt = r (beta + l r^2); r^2 follows a logistic law."""
    t = np.asarray(t, float)
    u0 = r0 * r0
    if beta == 0.0:
        u = u0 / (1.0 - 2.0 * l * u0 * t)
    else:
        e = np.exp(2.0 * beta * t)
        u = beta * u0 * e / (beta - l * u0 * (e - 1.0))
    return np.sqrt(u)


def ring_radius(m: ReducedModel) -> float:
    if m.beta < 0:
        raise NoRingError(f"beta={m.beta} < 0: no bifurcated ring below threshold")
    if m.beta == 0:
        warnings.warn("beta = 0: the ring degenerates to the origin", DegenerateRingWarning)
        return 0.0
    return math.sqrt(-m.beta / m.l)


# -- bifurcated states and cells ----------------------------------------------------------

def bifurcated_state(s1: float, s2: float, m: ReducedModel, p: PhysicalParams | None = None,
                     M: int | None = None, N: int | None = None) -> BifurcationSolution:
    M = max(M or 0, m.m_c)
    N = max(N or 0, 2)
    psi1, psi2 = m.eig.profiles(M, N)
    g = m.coeffs.g11.resized(M, N)
    r2 = s1 * s1 + s2 * s2
    state = SpectralState(s1 * psi1.v_hat + s2 * psi2.v_hat + r2 * g.v_hat,
                          s1 * psi1.theta_hat + s2 * psi2.theta_hat + r2 * g.theta_hat,
                          m.alpha)
    return BifurcationSolution(s1=s1, s2=s2, state=state, physical=p)


def stream_function(sol) -> Field:
    """psi = int_0^z v: a cos(n pi z) velocity mode maps to sin(n pi z)/(n pi)."""
    state = sol.state if isinstance(sol, BifurcationSolution) else sol
    c = np.zeros_like(state.v_hat)
    n = np.arange(1, state.N + 1)
    c[:, 1:] = state.v_hat[:, 1:] / (PI * n)[None, :]
    if np.any(state.v_hat[:, 0] != 0):
        raise ValueError("velocity has a nonzero vertical mean; psi(x, 1) would not vanish")
    return Field(c, "sin", state.alpha)


def count_cells(psi, z=None, rtol: float = 1e-9) -> int:
    """Sign regions of psi along z = 1/2 over one horizontal period.

    ``psi`` is either a 1-D periodic line of samples or a 2-D (nx, nz) grid
    together with its z coordinates.
    """
    line = np.asarray(psi, float)
    if line.ndim == 2:
        if z is None:
            raise ValueError("z coordinates are required for a 2-D field")
        z = np.asarray(z, float)
        j = int(np.argmin(np.abs(z - 0.5)))
        if abs(z[j] - 0.5) > 1e-12:
            # linear interpolation between the bracketing rows
            j1 = int(np.searchsorted(z, 0.5))
            j0 = j1 - 1
            w = (0.5 - z[j0]) / (z[j1] - z[j0])
            line = (1 - w) * line[:, j0] + w * line[:, j1]
        else:
            line = line[:, j]
    scale = np.max(np.abs(line)) if line.size else 0.0
    if scale == 0.0:
        return 0
    signs = np.sign(np.where(np.abs(line) <= rtol * scale, 0.0, line))
    signs = signs[signs != 0]
    changes = int(np.count_nonzero(signs != np.roll(signs, 1)))
    if changes == 0:
        return 1
    if line.size < 2 * changes:
        raise ValueError(f"grid of {line.size} points cannot resolve {changes} cells")
    return changes


# -- quadrature oracle --------------------------------------------------------------------

def _grid(M_out: int, N_out: int, alpha: float, M_in: int, N_in: int):
    nx = 2 * (2 * max(M_in, M_out) + 1) + 4
    nz = 3 * max(N_in, N_out) + 32
    x = np.arange(nx) * alpha / nx
    zq, wq = np.polynomial.legendre.leggauss(nz)
    return x, 0.5 * (zq + 1.0), 0.5 * wq


def quadrature_tendency(state: SpectralState, M_out: int, N_out: int) -> SpectralState:
    """-(v d_x + w d_z)(v, Theta) evaluated pointwise and projected by quadrature.

    Independent of the FFT path in the simulator: fields are summed directly
    at Gauss-Legendre depths and projected with explicit quadrature weights.
    The vertical mean of the velocity tendency is removed.
    """
    alpha = state.alpha
    x, z, wz = _grid(M_out, N_out, alpha, state.M, state.N)
    k = state.k
    n = np.arange(state.N + 1)
    syn = lambda c, basis: synthesize(c, alpha, x, z, basis)  # noqa: E731
    v = syn(state.v_hat, "cos")
    vx = syn(1j * k[:, None] * state.v_hat, "cos")
    vz = syn(-PI * n[None, :] * state.v_hat, "sin")
    th = syn(state.theta_hat, "sin")
    tx = syn(1j * k[:, None] * state.theta_hat, "sin")
    tz = syn(PI * n[None, :] * state.theta_hat, "cos")
    nn = np.where(n == 0, 1, n)
    w = syn(np.where(n[None, :] == 0, 0.0, -1j * k[:, None] * state.v_hat / (PI * nn[None, :])), "sin")
    fv = -(v * vx + w * vz)
    ft = -(v * tx + w * tz)
    out = SpectralState.zeros(M_out, N_out, alpha)
    ko = 2.0 * PI * np.arange(-M_out, M_out + 1) / alpha
    ex = np.exp(-1j * np.outer(ko, x)) / x.size  # (2M+1, nx), mean over x
    no = np.arange(N_out + 1)
    cos = np.cos(PI * np.outer(z, no)) * wz[:, None]
    sin = np.sin(PI * np.outer(z, no)) * wz[:, None]
    norm = np.where(no == 0, 1.0, 2.0)[None, :]
    out.v_hat = ex @ fv @ cos * norm
    out.theta_hat = ex @ ft @ sin * norm
    out.v_hat[:, 0] = 0.0
    out.theta_hat[:, 0] = 0.0
    return out


def _resolve(rhs: SpectralState, d: DimensionlessParams, shift: float) -> SpectralState:
    """Solve (L - shift) g = rhs mode by mode with the 2x2 blocks (minimum-norm when singular)."""
    out = SpectralState.zeros(rhs.M, rhs.N, rhs.alpha)
    for i, m in enumerate(range(-rhs.M, rhs.M + 1)):
        for n in range(1, rhs.N + 1):
            L = mode_matrix(m, n, d) - shift * np.eye(2)
            b = np.array([rhs.v_hat[i, n], rhs.theta_hat[i, n]])
            # the critical block is singular at beta = 0; P_s leaves b in its range
            sol = np.linalg.lstsq(L, b, rcond=1e-13)[0]
            out.v_hat[i, n], out.theta_hat[i, n] = sol
    return out


def _apply_L(s: SpectralState, d: DimensionlessParams) -> SpectralState:
    out = SpectralState.zeros(s.M, s.N, s.alpha)
    for i, m in enumerate(range(-s.M, s.M + 1)):
        for n in range(1, s.N + 1):
            y = mode_matrix(m, n, d) @ np.array([s.v_hat[i, n], s.theta_hat[i, n]])
            out.v_hat[i, n], out.theta_hat[i, n] = y
    return out


def _project_stable(s: SpectralState, psi1: SpectralState, psi2: SpectralState) -> SpectralState:
    a1, a2 = s.dot(psi1), s.dot(psi2)
    return s + psi1.scaled(-a1) + psi2.scaled(-a2)


def _cross_tendency(a: SpectralState, b: SpectralState, M: int, N: int) -> SpectralState:
    """Symmetric bilinear part N(a, b) + N(b, a) by polarisation."""
    both = quadrature_tendency(a + b, M, N)
    na = quadrature_tendency(a, M, N)
    nb = quadrature_tendency(b, M, N)
    return SpectralState(both.v_hat - na.v_hat - nb.v_hat,
                         both.theta_hat - na.theta_hat - nb.theta_hat, a.alpha)


def manifold_residual(model: ReducedModel, d: DimensionlessParams, M: int = 4, N: int = 6) -> dict:
    """Residuals of the quadratic manifold equations with g substituted back.

    (L - 2 beta) g_ii + P_s N(psi_i, psi_i) and
    (L - 2 beta) g_12 + P_s (N(psi_1, psi_2) + N(psi_2, psi_1)), by quadrature.
    """
    d = d.with_rayleigh(model.rayleigh)
    psi1, psi2 = model.eig.profiles(M, N)
    n11 = _project_stable(quadrature_tendency(psi1, M, N), psi1, psi2)
    n22 = _project_stable(quadrature_tendency(psi2, M, N), psi1, psi2)
    n12 = _project_stable(_cross_tendency(psi1, psi2, M, N), psi1, psi2)
    out = {}
    for name, g, nl in (("g11", model.coeffs.g11, n11), ("g22", model.coeffs.g22, n22),
                        ("g12", model.coeffs.g12, n12)):
        g = g.resized(M, N)
        lg = _apply_L(g, d)
        res = lg + g.scaled(-2.0 * model.beta) + nl
        out[name] = math.sqrt(max(res.dot(res), 0.0))
    return out


def oracle_bifurcation_coefficient(d: DimensionlessParams, M: int = 4, N: int = 6,
                                   amplitudes=None, m_max: int = 256) -> dict:
    """Independent value of l from quadrature, a per-mode resolvent and a polynomial fit.

    g is obtained by solving (L - 2 beta) g = -P_s N(psi_1, psi_1) over all
    retained modes; then f(s) = <N(s psi_1 + s^2 g), psi_1> is sampled and
    the s^3 coefficient of the interpolating quartic is returned.
    """
    cp, R, eig = _critical_data(d, m_max)
    d = d.with_rayleigh(R)
    M = max(M, 2 * eig.m)
    psi1, psi2 = eig.profiles(M, N)
    n11 = _project_stable(quadrature_tendency(psi1, M, N), psi1, psi2)
    rhs = n11.scaled(-1.0)
    g = _resolve(rhs, d, 2.0 * eig.beta)
    cross = _cross_tendency(psi1, psi2, M, N)
    n22 = quadrature_tendency(psi2, M, N)
    g12 = _resolve(_project_stable(cross, psi1, psi2).scaled(-1.0), d, 2.0 * eig.beta)
    g22 = _resolve(_project_stable(n22, psi1, psi2).scaled(-1.0), d, 2.0 * eig.beta)
    if amplitudes is None:
        amplitudes = np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0])
    f = []
    for s in amplitudes:
        u = psi1.scaled(s) + g.scaled(s * s)
        f.append(quadrature_tendency(u, M, N).dot(psi1))
    coef = np.polynomial.polynomial.polyfit(amplitudes, f, 4)
    return {"l": float(coef[3]), "poly": coef, "g11": g, "g12": g12, "g22": g22,
            "beta": eig.beta, "m_c": eig.m}

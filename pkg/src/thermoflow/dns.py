"""Pseudo-spectral simulator for the dimensionless perturbation system.

Velocity lives on exp(ikx) cos(n pi z), temperature on exp(ikx) sin(n pi z).
Products are formed on a grid covering the even/odd extension of the fields
to z in [0, 2), so a single complex 2-D FFT handles both bases.  Diffusion is
treated by Crank-Nicolson (diagonal per mode); buoyancy coupling and
advection go through second-order Adams-Bashforth.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import fft as sfft

from .linear import Eigenvector, diffusion_rates, eigenvalues
from .params import DimensionlessParams
from .spectral import SpectralState, vertical_weights

__all__ = [
    "BlowUpError",
    "SolverConfig",
    "Diagnostics",
    "Transform",
    "FitResult",
    "Simulation",
    "init_from_eigenmode",
    "init_random",
    "vertical_velocity",
    "project_vertical_mean",
    "nonlinear_tendency",
    "linear_coupling",
    "full_tendency",
    "step",
    "diagnostics",
    "norms",
    "stable_dt",
    "advective_dt",
    "decay_rate_fit",
    "first_crossing",
]

PI = math.pi
BLOWUP_L2 = 1e6


class BlowUpError(RuntimeError):
    def __init__(self, t: float, message: str, last: "Diagnostics | None" = None):
        super().__init__(f"t={t}: {message}")
        self.t = t
        self.last = last


@dataclass
class SolverConfig:
    M: int
    N: int
    dt: float
    t_end: float
    dealias: bool = True
    scheme: str = "imex_cn_ab2"
    diag_every: int = 1
    seed: int = 0
    nonlinear: bool = True

    def __post_init__(self):
        if self.M < 4 or self.N < 4:
            raise ValueError("M and N must be at least 4")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.scheme != "imex_cn_ab2":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.diag_every < 1:
            raise ValueError("diag_every must be >= 1")


@dataclass
class Diagnostics:
    t: float
    l2_v: float
    l2_theta: float
    h1_v: float
    h1_theta: float
    h2_v: float
    h2_theta: float
    dissipation: float
    cross_term: float
    x1: float
    x2: float
    energy_residual: float
    compat_residual: float
    steady_balance: float
    diss_v: float
    diss_theta: float

    @property
    def l2(self) -> float:
        return math.hypot(self.l2_v, self.l2_theta)

    @property
    def h1(self) -> float:
        return math.hypot(self.h1_v, self.h1_theta)

    @property
    def h2(self) -> float:
        return math.hypot(self.h2_v, self.h2_theta)

    def as_dict(self) -> dict:
        return asdict(self)


# -- transforms ---------------------------------------------------------------------------

class Transform:
    """Coefficient <-> grid maps on the period-2 extension in z.

    With dealiasing the grid is at least (3M+1) x (3N+1), so every quadratic
    product of retained modes is computed without aliasing.  Without it the
    minimal (2M+1) x (2N+2) grid is used.
    """

    def __init__(self, M: int, N: int, alpha: float, dealias: bool = True):
        self.M, self.N, self.alpha = M, N, alpha
        if dealias:
            px, pz = 3 * M + 1, 3 * N + 1
        else:
            px, pz = 2 * M + 1, 2 * N + 2
        self.px = sfft.next_fast_len(px)
        self.pz = sfft.next_fast_len(max(pz, 2 * N + 1))
        m = np.arange(-M, M + 1)
        n = np.arange(N + 1)
        self._mi = (m % self.px)[:, None]
        self._np = n[None, :]
        self._nn = (self.pz - n[1:])[None, :]

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.px) * self.alpha / self.px

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.pz) * 2.0 / self.pz

    def to_grid(self, coeffs, bases) -> np.ndarray:
        """Stacked real fields (K, px, pz) from K coefficient arrays and their bases."""
        G = np.zeros((len(coeffs), self.px, self.pz), complex)
        for j, (c, b) in enumerate(zip(coeffs, bases)):
            if b == "cos":
                pos = c.copy()
                pos[:, 1:] *= 0.5
                neg = 0.5 * c[:, 1:]
            elif b == "sin":
                pos = c * (-0.5j)
                pos[:, 0] = 0.0
                neg = c[:, 1:] * 0.5j
            else:
                raise ValueError("basis must be 'cos' or 'sin'")
            G[j][self._mi, self._np] = pos
            G[j][self._mi, self._nn] = neg
        return sfft.ifft2(G, axes=(-2, -1), norm="forward").real

    def from_grid(self, fields, bases) -> list:
        G = sfft.fft2(np.asarray(fields, float), axes=(-2, -1), norm="forward")
        out = []
        for j, b in enumerate(bases):
            gp = G[j][self._mi, self._np]
            gn = G[j][self._mi, self._nn]
            c = np.empty_like(gp)
            if b == "cos":
                c[:, 0] = gp[:, 0]
                c[:, 1:] = gp[:, 1:] + gn
            else:
                c[:, 0] = 0.0
                c[:, 1:] = 1j * (gp[:, 1:] - gn)
            out.append(c)
        return out


# -- elementary spectral operators --------------------------------------------------------

def _n_factor(N: int) -> np.ndarray:
    n = np.arange(N + 1, dtype=float)
    n[0] = np.inf  # 1/(n pi) -> 0 on the n = 0 column
    return 1.0 / (PI * n)


def vertical_velocity(s: SpectralState) -> np.ndarray:
    """Sine coefficients of w = -int_0^z d_x v."""
    return -1j * s.k[:, None] * s.v_hat * _n_factor(s.N)[None, :]


def project_vertical_mean(c: np.ndarray) -> np.ndarray:
    out = c.copy()
    out[:, 0] = 0.0
    return out


def nonlinear_tendency(s: SpectralState, transform: Transform | None = None) -> SpectralState:
    """-(v d_x + w d_z) applied to v and Theta, with the velocity part projected."""
    tr = transform or Transform(s.M, s.N, s.alpha)
    ik = 1j * s.k[:, None]
    npi = PI * np.arange(s.N + 1)[None, :]
    coeffs = [s.v_hat, ik * s.v_hat, -npi * s.v_hat, vertical_velocity(s),
              ik * s.theta_hat, npi * s.theta_hat]
    v, vx, vz, w, tx, tz = tr.to_grid(coeffs, ["cos", "cos", "sin", "sin", "sin", "cos"])
    fv = -(v * vx + w * vz)
    ft = -(v * tx + w * tz)
    nv, nt = tr.from_grid([fv, ft], ["cos", "sin"])
    return SpectralState(project_vertical_mean(nv), nt, s.alpha, s.t)


class _Operators:
    """Per-mode diffusion rates and coupling factors for a truncation."""

    def __init__(self, M: int, N: int, d: DimensionlessParams):
        m = np.arange(-M, M + 1)[:, None]
        n = np.arange(N + 1)[None, :]
        dv, dt = diffusion_rates(m, n, d)
        self.dv = -dv
        self.dt = -dt
        k = 2.0 * PI * m / d.alpha
        fac = 1j * k * _n_factor(N)[None, :]
        self.cv = d.coupling_v * fac
        self.ct = d.coupling_theta * fac


def linear_coupling(s: SpectralState, d: DimensionlessParams, ops: _Operators | None = None) -> SpectralState:
    ops = ops or _Operators(s.M, s.N, d)
    return SpectralState(ops.cv * s.theta_hat, ops.ct * s.v_hat, s.alpha, s.t)


def full_tendency(s: SpectralState, d: DimensionlessParams, nonlinear: bool = True,
                  transform: Transform | None = None) -> SpectralState:
    """Complete right-hand side (diffusion, coupling and advection) of the projected system."""
    ops = _Operators(s.M, s.N, d)
    out = SpectralState(ops.dv * s.v_hat, ops.dt * s.theta_hat, s.alpha, s.t) + linear_coupling(s, d, ops)
    if nonlinear:
        out = out + nonlinear_tendency(s, transform)
    out.v_hat[:, 0] = 0.0
    return out


# -- norms and diagnostics ----------------------------------------------------------------

def _weighted(c: np.ndarray, alpha: float, mult: np.ndarray) -> float:
    w = vertical_weights(c.shape[1] - 1)[None, :]
    return float(alpha * np.sum(np.abs(c) ** 2 * w * mult))


def norms(s: SpectralState) -> dict:
    k2 = (s.k**2)[:, None]
    n2 = ((PI * np.arange(s.N + 1)) ** 2)[None, :]
    one = np.ones_like(k2 + n2)
    h1 = one + k2 + n2
    h2 = h1 + k2**2 + k2 * n2 + n2**2
    out = {}
    for name, c in (("v", s.v_hat), ("theta", s.theta_hat)):
        out[f"l2_{name}"] = math.sqrt(_weighted(c, s.alpha, one))
        out[f"h1_{name}"] = math.sqrt(_weighted(c, s.alpha, h1))
        out[f"h2_{name}"] = math.sqrt(_weighted(c, s.alpha, h2))
    return out


def _energy_terms(s: SpectralState, d: DimensionlessParams, ops: _Operators):
    """(energy, dissipation E1, coupling power, dissV, dissTheta)."""
    k2 = (s.k**2)[:, None]
    n2 = ((PI * np.arange(s.N + 1)) ** 2)[None, :]
    diss_v = _weighted(s.v_hat, s.alpha, d.pr_x * k2 + d.pr_z * n2)
    diss_t = _weighted(s.theta_hat, s.alpha, k2 + d.kappa_a * n2)
    energy = _weighted(s.v_hat, s.alpha, 1.0) + _weighted(s.theta_hat, s.alpha, 1.0)
    c = linear_coupling(s, d, ops)
    w = vertical_weights(s.N)[None, :]
    cross = 2.0 * s.alpha * float(np.sum(((np.conj(s.v_hat) * c.v_hat).real
                                          + (np.conj(s.theta_hat) * c.theta_hat).real) * w))
    return energy, diss_v + diss_t, cross, diss_v, diss_t


def _compat(s: SpectralState) -> float:
    """L2 norm in x of psi(x, 1) = int_0^1 v dz, summed mode by mode."""
    n = np.arange(1, s.N + 1)
    top = s.v_hat[:, 0] + s.v_hat[:, 1:] @ (np.sin(PI * n) / (PI * n))
    return math.sqrt(s.alpha * float(np.sum(np.abs(top) ** 2)))


def diagnostics(s: SpectralState, d: DimensionlessParams, eig: Eigenvector | None = None,
                previous: tuple | None = None, dt: float | None = None,
                ops: _Operators | None = None) -> Diagnostics:
    """Norms, functionals and balances of one state.

    ``previous`` is the (energy, E1, cross) triple of the preceding step; with
    ``dt`` it yields the discrete energy-balance residual.
    """
    ops = ops or _Operators(s.M, s.N, d)
    nm = norms(s)
    energy, e1, cross, dv, dth = _energy_terms(s, d, ops)
    resid = float("nan")
    if previous is not None and dt:
        e0, e10, c0 = previous
        resid = abs((energy - e0) / dt + (e10 + e1) - 0.5 * (c0 + cross))
    x1 = x2 = 0.0
    if eig is not None and abs(eig.m) <= s.M and eig.n <= s.N:
        p1, p2 = eig.profiles(s.M, s.N)
        x1, x2 = s.dot(p1), s.dot(p2)
    total = dv + dth
    return Diagnostics(t=s.t, dissipation=e1, cross_term=cross, x1=x1, x2=x2,
                       energy_residual=resid, compat_residual=_compat(s),
                       steady_balance=abs(dth - dv) / total if total > 0 else 0.0,
                       diss_v=dv, diss_theta=dth, **nm)


# -- initial data -------------------------------------------------------------------------

def init_from_eigenmode(delta: float, eig: Eigenvector, M: int, N: int, angle: float = 0.0) -> SpectralState:
    """delta * (cos(angle) psi_1 + sin(angle) psi_2)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    p1, p2 = eig.profiles(M, N)
    s = p1.scaled(delta * math.cos(angle)) + p2.scaled(delta * math.sin(angle))
    return s.enforce()


def init_random(amplitude: float, seed: int, M: int, N: int, alpha: float,
                decay: float = 2.0) -> SpectralState:
    """Gaussian coefficients with algebraic spectral decay, made admissible and rescaled."""
    if not amplitude > 0:
        raise ValueError("amplitude must be positive")
    rng = np.random.default_rng(seed)
    shape = (2 * M + 1, N + 1)
    m = np.abs(np.arange(-M, M + 1))[:, None]
    n = np.arange(N + 1)[None, :]
    envelope = 1.0 / (1.0 + m**2 + n**2) ** (decay / 2.0)
    parts = rng.standard_normal((4,) + shape)
    s = SpectralState((parts[0] + 1j * parts[1]) * envelope,
                      (parts[2] + 1j * parts[3]) * envelope, alpha).enforce()
    norm = math.sqrt(s.dot(s))
    return s.scaled(amplitude / norm).enforce()


# -- time stepping ------------------------------------------------------------------------

def step(s: SpectralState, c: SolverConfig, d: DimensionlessParams, f_prev: SpectralState | None = None,
         transform: Transform | None = None, ops: _Operators | None = None):
    """One IMEX CN/AB2 step; explicit Euler on the explicit part when f_prev is None.

    Returns (new_state, explicit_tendency_at_s) so the caller can chain steps.
    """
    ops = ops or _Operators(s.M, s.N, d)
    f = linear_coupling(s, d, ops)
    if c.nonlinear:
        f = f + nonlinear_tendency(s, transform or Transform(s.M, s.N, s.alpha, c.dealias))
    dt = c.dt
    if f_prev is None:
        ev, et = f.v_hat, f.theta_hat
    else:
        ev = 1.5 * f.v_hat - 0.5 * f_prev.v_hat
        et = 1.5 * f.theta_hat - 0.5 * f_prev.theta_hat
    v = ((1.0 + 0.5 * dt * ops.dv) * s.v_hat + dt * ev) / (1.0 - 0.5 * dt * ops.dv)
    th = ((1.0 + 0.5 * dt * ops.dt) * s.theta_hat + dt * et) / (1.0 - 0.5 * dt * ops.dt)
    out = SpectralState(v, th, s.alpha, s.t + dt, dict(s.meta)).enforce()
    return out, f


def stable_dt(d: DimensionlessParams, M: int, N: int, dt_max: float = 1.0, safety: float = 0.8) -> float:
    """Largest dt for which the linear CN/AB2 iteration is stable on every retained mode.

    Each mode gives a 4x4 companion matrix for (u^{n+1}, u^n); its spectral
    radius must not exceed exp(2 max(beta_+, 0) dt).  Found by bisection.
    """
    m = np.arange(0, M + 1)[:, None]
    n = np.arange(1, N + 1)[None, :]
    dv, dtt = diffusion_rates(m, n, d)
    k = 2.0 * PI * m / d.alpha
    cv = d.coupling_v * 1j * k / (PI * n)
    ct = d.coupling_theta * 1j * k / (PI * n)
    growth = np.maximum(eigenvalues(m, n, d.rayleigh, d).beta_plus, 0.0) if d.sign == 1 else 0.0
    dv, dtt, cv, ct = (np.broadcast_to(a, (M + 1, N)).ravel() for a in (dv, dtt, cv, ct))
    growth = np.broadcast_to(growth, (M + 1, N)).ravel()

    def ok(h: float) -> bool:
        av = (1 - 0.5 * h * dv) / (1 + 0.5 * h * dv)
        at = (1 - 0.5 * h * dtt) / (1 + 0.5 * h * dtt)
        bv = h / (1 + 0.5 * h * dv)
        bt = h / (1 + 0.5 * h * dtt)
        K = dv.size
        T = np.zeros((K, 4, 4), complex)
        T[:, 0, 0] = av
        T[:, 1, 1] = at
        T[:, 0, 1] = 1.5 * bv * cv
        T[:, 1, 0] = 1.5 * bt * ct
        T[:, 0, 3] = -0.5 * bv * cv
        T[:, 1, 2] = -0.5 * bt * ct
        T[:, 2, 0] = 1.0
        T[:, 3, 1] = 1.0
        rho = np.max(np.abs(np.linalg.eigvals(T)), axis=1)
        return bool(np.all(rho <= np.exp(2.0 * growth * h) * (1.0 + 1e-12)))

    if ok(dt_max):
        return safety * dt_max
    lo, hi = 0.0, dt_max
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6 * hi:
            break
    if lo == 0.0:
        raise RuntimeError("no stable time step found")
    return safety * lo


def advective_dt(s: SpectralState, courant: float = 0.5, nx: int | None = None) -> float:
    """Courant limit from the sampled velocity magnitudes."""
    tr = Transform(s.M, s.N, s.alpha)
    v, w = tr.to_grid([s.v_hat, vertical_velocity(s)], ["cos", "sin"])
    dx = s.alpha / (2 * s.M + 1)
    dz = 1.0 / (s.N + 1)
    speed = np.max(np.abs(v)) / dx + np.max(np.abs(w)) / dz
    return math.inf if speed == 0 else courant / speed


class Simulation:
    """Owns a state and advances it, recording diagnostics at a fixed cadence."""

    def __init__(self, state: SpectralState, d: DimensionlessParams, config: SolverConfig,
                 eig: Eigenvector | None = None):
        if (state.M, state.N) != (config.M, config.N):
            raise ValueError("state truncation does not match the solver configuration")
        if not state.satisfies_invariants(1e-14 * max(1.0, math.sqrt(abs(state.dot(state))))):
            raise ValueError("initial state violates the admissibility invariants")
        self.state = state.copy().enforce()
        self.d = d
        self.config = config
        self.eig = eig
        self.ops = _Operators(config.M, config.N, d)
        self.transform = Transform(config.M, config.N, state.alpha, config.dealias)
        self._f_prev = None
        self._steps = 0
        self._energy = _energy_terms(self.state, d, self.ops)[:3]
        self.history: list[Diagnostics] = [self._diag(None)]
        cfl = advective_dt(self.state)
        if config.nonlinear and config.dt > cfl:
            raise ValueError(f"dt={config.dt} exceeds the advective Courant limit {cfl:.3g}")

    def _diag(self, previous) -> Diagnostics:
        return diagnostics(self.state, self.d, self.eig, previous,
                           self.config.dt if previous is not None else None, self.ops)

    def advance(self) -> None:
        prev_energy = self._energy
        first = self._f_prev is None
        self.state, self._f_prev = step(self.state, self.config, self.d, self._f_prev,
                                        self.transform, self.ops)
        self._steps += 1
        energy = _energy_terms(self.state, self.d, self.ops)[:3]
        self._energy = energy
        l2 = math.sqrt(max(energy[0], 0.0)) if math.isfinite(energy[0]) else math.inf
        if not math.isfinite(l2) or l2 > BLOWUP_L2:
            raise BlowUpError(self.state.t, f"L2 norm {l2} above {BLOWUP_L2} or not finite",
                              self.history[-1] if self.history else None)
        if self._steps % self.config.diag_every == 0:
            # the Euler start-up step is only first order; its balance is not reported
            self.history.append(self._diag(None if first else prev_energy))

    def run(self, t_end: float | None = None, stop=None) -> list[Diagnostics]:
        """Advance to t_end (config.t_end by default); ``stop(diag)`` may end the run early."""
        t_end = self.config.t_end if t_end is None else t_end
        nsteps = int(round((t_end - self.state.t) / self.config.dt))
        for _ in range(max(nsteps, 0)):
            self.advance()
            if stop is not None and self._steps % self.config.diag_every == 0 and stop(self.history[-1]):
                break
        return self.history

    def series(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        t = np.array([h.t for h in self.history])
        y = np.array([getattr(h, name) for h in self.history])
        return t, y


# -- post-processing ----------------------------------------------------------------------

@dataclass
class FitResult:
    rate: float
    intercept: float
    r_squared: float
    samples: int
    window: tuple = field(default=(None, None))


def decay_rate_fit(t, y, window=None) -> FitResult:
    """Least-squares slope of log(y) against t over ``window = (t0, t1)``."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if t.size < 10:
        raise ValueError(f"need at least 10 samples in the window, got {t.size}")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("norms in the fitting window must be positive and finite")
    ly = np.log(y)
    slope, intercept = np.polyfit(t, ly, 1)
    fitted = slope * t + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return FitResult(rate=float(slope), intercept=float(intercept), r_squared=r2,
                     samples=int(t.size), window=tuple(window) if window else (float(t[0]), float(t[-1])))


def first_crossing(t, y, level: float) -> float | None:
    """First time y reaches ``level``, interpolated linearly in log(y)."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if y[0] >= level:
        return float(t[0])
    idx = np.nonzero(y >= level)[0]
    if idx.size == 0:
        return None
    j = int(idx[0])
    l0, l1 = math.log(y[j - 1]), math.log(y[j])
    frac = (math.log(level) - l0) / (l1 - l0)
    return float(t[j - 1] + frac * (t[j] - t[j - 1]))

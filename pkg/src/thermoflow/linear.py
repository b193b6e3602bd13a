"""Closed-form linear stability of the motionless state.

Per mode (m, n), with k = 2 pi m / alpha and a = k^2, the linearised
operator acts on (v_mn, Theta_mn) as the Hermitian 2x2 matrix

    [[-(Pr_x a + Pr_z n^2 pi^2),   i R k / (n pi)          ],
     [ -i R k / (n pi),           -(a + kappa_a n^2 pi^2)  ]]

for heating from below; its eigenvalues are -A_mn +/- B_mn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .params import DimensionlessParams, PhysicalParams, deltaT_from_rayleigh, nondimensionalize
from .spectral import SpectralState, embed_real_mode

__all__ = [
    "NoNeutralModeError",
    "ModeIndex",
    "EigenData",
    "Eigenvector",
    "CriticalPoint",
    "ExchangeReport",
    "diffusion_rates",
    "mode_matrix",
    "dispersion_R2",
    "eigenvalues",
    "shape_function",
    "critical_search",
    "critical_temperature",
    "critical_temperature_direct",
    "eigenvector",
    "exchange_of_stabilities_report",
    "rayleigh_quotient",
    "dissipation_functional",
    "coupling_functional",
    "dense_oracle_spectrum",
]

PI2 = math.pi**2


class NoNeutralModeError(ValueError):
    """The m = 0 modes are decoupled from R and never become neutral."""


@dataclass(frozen=True)
class ModeIndex:
    m: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("vertical index n must be >= 1")


@dataclass(frozen=True)
class EigenData:
    m: int
    n: int
    a: float
    A: float
    B: float
    C: float
    beta_plus: float
    beta_minus: float


@dataclass
class Eigenvector:
    m: int
    n: int
    branch: str
    beta: float
    rayleigh: float
    alpha: float
    coeff_v: complex
    coeff_theta: complex
    a_coefficient: float
    norm_sq: float

    def profiles(self, M: int, N: int) -> tuple[SpectralState, SpectralState]:
        """The two real unit profiles (Re and Im of the complex mode) in a truncation."""
        if abs(self.m) > M or self.n > N:
            raise ValueError(f"mode ({self.m},{self.n}) does not fit in truncation M={M}, N={N}")
        out = []
        for part in ("re", "im"):
            s = SpectralState.zeros(M, N, self.alpha)
            embed_real_mode(s.v_hat, self.m, self.n, self.coeff_v, part)
            embed_real_mode(s.theta_hat, self.m, self.n, self.coeff_theta, part)
            out.append(s)
        return out[0], out[1]


@dataclass
class CriticalPoint:
    r_c: float
    m_c: int
    F_values: np.ndarray
    truncated: bool
    n1_minimal: bool
    transversal_slope: float
    t_c: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "ok" if not self.warnings else "warning"


def diffusion_rates(m, n, d: DimensionlessParams):
    """(Pr_x a + Pr_z n^2 pi^2, a + kappa_a n^2 pi^2) with a = (2 pi m / alpha)^2."""
    a = (2.0 * np.pi * np.asarray(m, float) / d.alpha) ** 2
    nn = PI2 * np.asarray(n, float) ** 2
    return d.pr_x * a + d.pr_z * nn, a + d.kappa_a * nn


def mode_matrix(m: int, n: int, d: DimensionlessParams) -> np.ndarray:
    """Linear evolution matrix of (v_mn, Theta_mn) for the sign regime and R stored in d."""
    dv, dt = diffusion_rates(m, n, d)
    k = 2.0 * np.pi * m / d.alpha
    c = 1j * k / (n * np.pi)
    return np.array([[-dv, d.coupling_v * c], [d.coupling_theta * c, -dt]], dtype=complex)


def dispersion_R2(m: int, n: int, d: DimensionlessParams) -> float:
    if m == 0:
        raise NoNeutralModeError("mode m=0 has no neutral Rayleigh number")
    if n < 1:
        raise ValueError("n must be >= 1")
    a = (2.0 * math.pi * m / d.alpha) ** 2
    nn = n * n * PI2
    return nn * (d.pr_x * a + d.pr_z * nn) * (a + d.kappa_a * nn) / a


def eigenvalues(m, n, R: float, d: DimensionlessParams) -> EigenData:
    """beta_{m,n}^{+/-} for heating from below; B from the completed square."""
    if np.any(np.asarray(n) < 1):
        raise ValueError("n must be >= 1")
    if R < 0:
        raise ValueError("R must be >= 0")
    dv, dt = diffusion_rates(m, n, d)
    a = (2.0 * np.pi * np.asarray(m, float) / d.alpha) ** 2
    nn = PI2 * np.asarray(n, float) ** 2
    coupling = R * R * a / nn
    A = 0.5 * (dv + dt)
    B = np.sqrt(0.25 * (dv - dt) ** 2 + coupling)
    C = dv * dt - coupling
    return EigenData(m=m, n=n, a=a, A=A, B=B, C=C, beta_plus=-A + B, beta_minus=-A - B)


def shape_function(m, d: DimensionlessParams):
    """F(m) = 4 m^2 / (Pr_a alpha^2) + kappa_a alpha^2 / (4 m^2)."""
    m = np.asarray(m, float)
    return 4.0 * m**2 / (d.pr_a * d.alpha**2) + d.kappa_a * d.alpha**2 / (4.0 * m**2)


def _rc2_from_F(F, d: DimensionlessParams):
    return math.pi**4 * d.pr_z * (1.0 + d.kappa_a / d.pr_a + F)


def critical_search(d: DimensionlessParams, m_max: int = 256, n_max: int = 8,
                    tie_rtol: float = 1e-12) -> CriticalPoint:
    """Minimise the neutral R over m = 1..m_max at n = 1; smallest m wins ties."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    ms = np.arange(1, m_max + 1)
    F = shape_function(ms, d)
    fmin = F.min()
    m_c = int(ms[np.nonzero(F <= fmin * (1.0 + tie_rtol))[0][0]])
    r_c = math.sqrt(_rc2_from_F(F[m_c - 1], d))
    warnings = []
    truncated = m_c == m_max
    if truncated:
        warnings.append(f"minimum at the truncation bound m_max={m_max}; enlarge m_max")

    n1_minimal = True
    if n_max > 1:
        r2_n1 = r_c**2
        for n in range(2, n_max + 1):
            r2 = min(dispersion_R2(m, n, d) for m in range(1, m_max + 1))
            if r2 < r2_n1 * (1.0 - 1e-12):
                n1_minimal = False
                warnings.append(f"vertical mode n={n} has a lower neutral R than n=1")
                break

    h = 1e-6 * r_c
    slope = (eigenvalues(m_c, 1, r_c + h, d).beta_plus
             - eigenvalues(m_c, 1, r_c - h, d).beta_plus) / (2.0 * h)
    return CriticalPoint(r_c=r_c, m_c=m_c, F_values=F, truncated=truncated,
                         n1_minimal=n1_minimal, transversal_slope=float(slope), warnings=warnings)


def critical_temperature_direct(p: PhysicalParams, m_c: int) -> float:
    """T_c written directly in the physical parameters for a given m_c."""
    pref = math.pi**4 * p.mu_z * p.kappa_x / p.buoyancy_scale
    d = nondimensionalize(p)
    return pref * (p.kappa_z * p.mu_x / (p.mu_z * p.kappa_x) + 1.0) + pref * float(shape_function(m_c, d))


def critical_temperature(p: PhysicalParams, m_max: int = 256, n_max: int = 8) -> CriticalPoint:
    d = nondimensionalize(p)
    cp = critical_search(d, m_max=m_max, n_max=n_max)
    cp.t_c = deltaT_from_rayleigh(cp.r_c, p)
    direct = critical_temperature_direct(p, cp.m_c)
    if abs(direct - cp.t_c) > 1e-9 * abs(cp.t_c):
        cp.warnings.append(f"T_c cross-check mismatch: {cp.t_c!r} vs direct {direct!r}")
    return cp


def eigenvector(m: int, n: int, branch: str, R: float, d: DimensionlessParams) -> Eigenvector:
    """Unit-norm eigenfunction pair of the coupled mode (m, n) on the given branch.

    The velocity amplitude is fixed real and positive.  For the (m_c, 1, +)
    branch the temperature coefficient is -i A v with A the familiar
    2 pi m R / (alpha pi (a + kappa_a pi^2 + beta)).
    """
    if m == 0:
        raise ValueError("the coupled eigenvector needs m != 0")
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    ed = eigenvalues(m, n, R, d)
    beta = float(ed.beta_plus if branch == "+" else ed.beta_minus)
    dv, dt = diffusion_rates(m, n, d)
    k = 2.0 * math.pi * m / d.alpha
    # ratio Theta/v from whichever row is better conditioned
    den_t = float(dt) + beta
    den_v = float(dv) + beta
    if abs(den_t) >= abs(den_v):
        if den_t == 0.0:
            raise ArithmeticError("degenerate eigenvector denominator")
        ratio = -1j * R * k / (n * math.pi * den_t)
        v, th = 1.0 + 0j, ratio
    else:
        # first row: den_v v = i R k Theta / (n pi)
        v, th = 1j * R * k / (n * math.pi * den_v), 1.0 + 0j
        if R == 0.0:
            v = 0j
    scale = math.sqrt(d.alpha * (abs(v) ** 2 + abs(th) ** 2) / 4.0)
    # fix global phase so that v is real positive when present
    if abs(v) > 0:
        ph = abs(v) / v
        v, th = v * ph, th * ph
    v, th = v / scale, th / scale
    a_coef = float((1j * th / v).real) if abs(v) > 0 else float("nan")
    if branch == "+" and R > 0:
        denom = n * math.pi * (float(dt) + beta)
        if not denom > 0:
            raise ArithmeticError("nonpositive A-coefficient denominator on the + branch")
    return Eigenvector(m=m, n=n, branch=branch, beta=beta, rayleigh=R, alpha=d.alpha,
                       coeff_v=complex(v), coeff_theta=complex(th), a_coefficient=a_coef,
                       norm_sq=float(abs(v) ** 2))


@dataclass
class ExchangeReport:
    rayleigh: float
    r_c: float
    m_c: int
    positive: list
    neutral: list
    max_beta: float
    argmax: tuple
    passed: bool
    violations: list


def exchange_of_stabilities_report(R: float, d: DimensionlessParams, m_max: int, n_max: int,
                                   tol: float = 1e-9) -> ExchangeReport:
    """Enumerate beta^{+/-}(m, n) for 0 <= m <= m_max, 1 <= n <= n_max and check the pattern.

    m and -m are one physical pair, so only m >= 0 is listed.
    """
    if m_max < 1 or n_max < 1:
        raise ValueError("bounds must be >= 1")
    cp = critical_search(d, m_max=max(m_max, 1), n_max=1)
    ms, ns = np.meshgrid(np.arange(0, m_max + 1), np.arange(1, n_max + 1), indexing="ij")
    ed = eigenvalues(ms, ns, R, d)
    scale = np.maximum(np.abs(ed.A), 1.0)
    positive, neutral = [], []
    for branch, beta in (("+", ed.beta_plus), ("-", ed.beta_minus)):
        for (i, j), b in np.ndenumerate(beta):
            mode = (int(ms[i, j]), int(ns[i, j]), branch)
            if abs(b) <= tol * scale[i, j]:
                neutral.append(mode)
            elif b > 0:
                positive.append((mode, float(b)))
    idx = np.unravel_index(np.argmax(ed.beta_plus), ed.beta_plus.shape)
    argmax = (int(ms[idx]), int(ns[idx]), "+")
    violations = []
    rc = cp.r_c
    crit = (cp.m_c, 1, "+")
    if R < rc * (1 - tol):
        if positive or neutral:
            violations.append(("expected all eigenvalues negative", positive + neutral))
    elif R <= rc * (1 + tol):
        if positive or neutral != [crit]:
            violations.append(("expected exactly one neutral mode", positive + neutral))
    else:
        if not any(mode == crit for mode, _ in positive):
            violations.append(("critical mode not unstable above R_c", positive))
    return ExchangeReport(rayleigh=R, r_c=rc, m_c=cp.m_c, positive=positive, neutral=neutral,
                          max_beta=float(ed.beta_plus[idx]), argmax=argmax,
                          passed=not violations, violations=violations)


# -- variational characterisation -------------------------------------------------------

def _quadrature_fields(state: SpectralState, nz: int):
    """Fields, derivatives and int_0^z d_x v sampled for exact quadrature."""
    M, N, alpha = state.M, state.N, state.alpha
    nx = 2 * (2 * M + 1) + 2
    x = np.arange(nx) * alpha / nx
    zq, wq = np.polynomial.legendre.leggauss(nz)
    z = 0.5 * (zq + 1.0)
    wz = 0.5 * wq
    k = state.k
    ex = np.exp(1j * np.outer(x, k))
    n = np.arange(N + 1)
    cos = np.cos(np.pi * np.outer(n, z))
    sin = np.sin(np.pi * np.outer(n, z))
    ikv = 1j * k[:, None] * state.v_hat
    ikt = 1j * k[:, None] * state.theta_hat
    f = lambda c, phi: (ex @ c @ phi).real  # noqa: E731
    v = f(state.v_hat, cos)
    vx = f(ikv, cos)
    vz = f(-np.pi * n[None, :] * state.v_hat, sin)
    th = f(state.theta_hat, sin)
    tx = f(ikt, sin)
    tz = f(np.pi * n[None, :] * state.theta_hat, cos)
    # int_0^z sin(n pi xi) d xi = (1 - cos(n pi z)) / (n pi)
    n_safe = np.where(n == 0, 1, n)
    int_sin = np.where(n[:, None] == 0, 0.0, (1.0 - cos) / (np.pi * n_safe[:, None]))
    int_theta = f(state.theta_hat, int_sin)
    dx_int_theta = f(ikt, int_sin)
    w_dx = alpha / nx
    return dict(v=v, vx=vx, vz=vz, th=th, tx=tx, tz=tz, int_theta=int_theta,
                dx_int_theta=dx_int_theta, wx=w_dx, wz=wz)


def dissipation_functional(state: SpectralState, d: DimensionlessParams, nz: int = 64) -> float:
    """E1 = int Pr_x v_x^2 + Pr_z v_z^2 + Theta_x^2 + kappa_a Theta_z^2, by quadrature."""
    q = _quadrature_fields(state, max(nz, state.N + 8))
    integrand = (d.pr_x * q["vx"] ** 2 + d.pr_z * q["vz"] ** 2
                 + q["tx"] ** 2 + d.kappa_a * q["tz"] ** 2)
    return float(q["wx"] * np.sum(integrand @ q["wz"]))


def coupling_functional(state: SpectralState, nz: int = 64) -> float:
    """E2 = -int v d_x(int_0^z Theta), by quadrature."""
    q = _quadrature_fields(state, max(nz, state.N + 8))
    return float(-q["wx"] * np.sum((q["v"] * q["dx_int_theta"]) @ q["wz"]))


def rayleigh_quotient(state: SpectralState, d: DimensionlessParams, nz: int = 64) -> float:
    """E1 / (2 E2) for an admissible pair."""
    e2 = coupling_functional(state, nz)
    e1 = dissipation_functional(state, d, nz)
    if abs(e2) <= 1e-14 * max(e1, 1e-300):
        raise ZeroDivisionError("E2 vanishes; the Rayleigh quotient is undefined")
    return e1 / (2.0 * e2)


# -- dense Galerkin oracle ---------------------------------------------------------------

def _cumulative_gauss(fun, z: np.ndarray, order: int = 48) -> np.ndarray:
    """int_0^z fun(xi) d xi at each z via Gauss-Legendre on [0, z]."""
    t, w = np.polynomial.legendre.leggauss(order)
    xi = 0.5 * (t[None, :] + 1.0) * z[:, None]
    return (fun(xi) * w[None, :]).sum(axis=1) * 0.5 * z


@lru_cache(maxsize=16)
def _oracle_tables(n_max: int, nz: int):
    """Quadrature nodes and weights, basis samples and their running integrals."""
    zq, wq = np.polynomial.legendre.leggauss(nz)
    z = 0.5 * (zq + 1.0)
    wz = 0.5 * wq
    ns = np.arange(1, n_max + 1)
    cosb = np.cos(np.pi * np.outer(ns, z))
    sinb = np.sin(np.pi * np.outer(ns, z))
    int_cos = np.array([_cumulative_gauss(lambda xi, n=n: np.cos(n * np.pi * xi), z) for n in ns])
    int_sin = np.array([_cumulative_gauss(lambda xi, n=n: np.sin(n * np.pi * xi), z) for n in ns])
    return ns, wz, cosb, sinb, int_cos, int_sin


def dense_oracle_spectrum(R: float, d: DimensionlessParams, m: int, n_max: int,
                          nz: int = 96) -> np.ndarray:
    """Eigenvalues of the Galerkin matrix of the linearised operator at fixed m.

    Basis: cos(n pi z) for v and sin(n pi z) for Theta, n = 1..n_max.  The
    operator is applied pointwise (the vertical integral by nested quadrature,
    the projection by subtracting the quadrature vertical mean) and projected
    back with Gauss-Legendre weights.  Nothing here uses the closed form.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    k = 2.0 * math.pi * m / d.alpha
    ns, wz, cosb, sinb, int_cos, int_sin = _oracle_tables(n_max, nz)
    cv = R if d.sign != 0 else 1.0
    ct = -d.sign * R
    npi2 = ((ns * np.pi) ** 2)[:, None]
    # rows: images of v = e^{ikx} cos(n pi z) and Theta = e^{ikx} sin(n pi z), sampled at z
    lv_v = (-d.pr_x * k * k - d.pr_z * npi2) * cosb
    lv_v = lv_v - (lv_v @ wz)[:, None]
    lt_v = ct * 1j * k * int_cos
    lt_t = (-k * k - d.kappa_a * npi2) * sinb
    lv_t = -cv * 1j * k * int_sin
    lv_t = lv_t - (lv_t @ wz)[:, None]
    proj_c = 2.0 * cosb * wz[None, :]
    proj_s = 2.0 * sinb * wz[None, :]
    L = np.block([[proj_c @ lv_v.T, proj_c @ lv_t.T],
                  [proj_s @ lt_v.T, proj_s @ lt_t.T]])
    ev = np.linalg.eigvals(L)
    if not np.all(np.isfinite(ev)):
        raise np.linalg.LinAlgError("eigen-solver returned non-finite values")
    order = np.argsort(-ev.real)
    return ev[order]

"""Truncated Fourier x (cosine, sine) representation of (v, Theta).

Coefficients are stored on the full index range m = -M..M (row ``m + M``)
and n = 0..N.  The horizontal velocity uses the basis
``exp(i 2 pi m x / alpha) cos(n pi z)``, the temperature uses
``exp(i 2 pi m x / alpha) sin(n pi z)``; column 0 of ``theta_hat`` exists
only so both arrays share a shape and is always zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpectralState",
    "wavenumbers",
    "vertical_weights",
    "inner_product",
    "conjugate_mirror",
    "symmetrize",
    "embed_real_mode",
    "synthesize",
    "synthesize_grid",
]


def wavenumbers(M: int, alpha: float) -> np.ndarray:
    """Horizontal wavenumbers 2 pi m / alpha for m = -M..M."""
    return 2.0 * np.pi * np.arange(-M, M + 1) / alpha


def vertical_weights(N: int) -> np.ndarray:
    """int_0^1 phi_n^2 dz: 1 for the n=0 cosine, 1/2 otherwise."""
    w = np.full(N + 1, 0.5)
    w[0] = 1.0
    return w


def inner_product(a: np.ndarray, b: np.ndarray, alpha: float) -> float:
    """L2(D) inner product of two real fields given by coefficients in the same basis."""
    N = a.shape[1] - 1
    return float(alpha * np.sum((a * np.conj(b)).real * vertical_weights(N)[None, :]))


def conjugate_mirror(c: np.ndarray) -> np.ndarray:
    """Array whose row m holds conj(c[-m])."""
    return np.conj(c[::-1, :])


def symmetrize(c: np.ndarray) -> np.ndarray:
    """Project onto coefficient arrays of real fields; c[-m] == conj(c[m]) exactly."""
    return 0.5 * (c + conjugate_mirror(c))


@dataclass
class SpectralState:
    v_hat: np.ndarray
    theta_hat: np.ndarray
    alpha: float
    t: float = 0.0
    meta: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.v_hat = np.asarray(self.v_hat, dtype=complex)
        self.theta_hat = np.asarray(self.theta_hat, dtype=complex)
        if self.v_hat.shape != self.theta_hat.shape or self.v_hat.ndim != 2:
            raise ValueError("v_hat and theta_hat must be 2-D arrays of equal shape")
        if self.v_hat.shape[0] % 2 != 1:
            raise ValueError("first axis must have odd length 2M+1")

    @classmethod
    def zeros(cls, M: int, N: int, alpha: float, t: float = 0.0) -> "SpectralState":
        shape = (2 * M + 1, N + 1)
        return cls(np.zeros(shape, complex), np.zeros(shape, complex), alpha, t)

    @property
    def M(self) -> int:
        return (self.v_hat.shape[0] - 1) // 2

    @property
    def N(self) -> int:
        return self.v_hat.shape[1] - 1

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.M, self.alpha)

    def index(self, m: int) -> int:
        if abs(m) > self.M:
            raise IndexError(f"horizontal index {m} outside truncation M={self.M}")
        return m + self.M

    def copy(self) -> "SpectralState":
        return SpectralState(self.v_hat.copy(), self.theta_hat.copy(), self.alpha, self.t,
                             dict(self.meta))

    def enforce(self) -> "SpectralState":
        """Impose conjugate symmetry, zero vertical mean of v and the empty Theta column."""
        self.v_hat = symmetrize(self.v_hat)
        self.theta_hat = symmetrize(self.theta_hat)
        self.v_hat[:, 0] = 0.0
        self.theta_hat[:, 0] = 0.0
        return self

    def invariant_violations(self) -> dict:
        """Largest defect of each invariant; all zero for an admissible state."""
        return {
            "conjugate_v": float(np.max(np.abs(self.v_hat - conjugate_mirror(self.v_hat)))),
            "conjugate_theta": float(np.max(np.abs(self.theta_hat - conjugate_mirror(self.theta_hat)))),
            "vertical_mean_v": float(np.max(np.abs(self.v_hat[:, 0]))),
            "theta_n0": float(np.max(np.abs(self.theta_hat[:, 0]))),
        }

    def satisfies_invariants(self, tol: float = 0.0) -> bool:
        return all(v <= tol for v in self.invariant_violations().values())

    def __add__(self, other: "SpectralState") -> "SpectralState":
        return SpectralState(self.v_hat + other.v_hat, self.theta_hat + other.theta_hat,
                             self.alpha, self.t)

    def scaled(self, c: float) -> "SpectralState":
        return SpectralState(c * self.v_hat, c * self.theta_hat, self.alpha, self.t)

    def dot(self, other: "SpectralState") -> float:
        """L2(D) inner product summed over both fields."""
        return (inner_product(self.v_hat, other.v_hat, self.alpha)
                + inner_product(self.theta_hat, other.theta_hat, self.alpha))

    def resized(self, M: int, N: int) -> "SpectralState":
        """Copy into a different truncation, dropping or zero-padding modes."""
        out = SpectralState.zeros(M, N, self.alpha, self.t)
        mm = min(M, self.M)
        nn = min(N, self.N)
        out.v_hat[M - mm:M + mm + 1, :nn + 1] = self.v_hat[self.M - mm:self.M + mm + 1, :nn + 1]
        out.theta_hat[M - mm:M + mm + 1, :nn + 1] = self.theta_hat[self.M - mm:self.M + mm + 1, :nn + 1]
        return out

    def shifted(self, x0: float) -> "SpectralState":
        """Field translated by x0: f(x - x0)."""
        phase = np.exp(-1j * self.k * x0)[:, None]
        return SpectralState(self.v_hat * phase, self.theta_hat * phase, self.alpha, self.t)


def embed_real_mode(c: np.ndarray, m: int, n: int, coeff: complex, part: str = "re") -> None:
    """Add Re/Im(coeff e^{ikx} phi_n) into coefficient array ``c`` (in place)."""
    M = (c.shape[0] - 1) // 2
    if part == "im":
        coeff = -1j * coeff
    elif part != "re":
        raise ValueError("part must be 're' or 'im'")
    if m == 0:
        c[M, n] += coeff.real
        return
    c[M + m, n] += 0.5 * coeff
    c[M - m, n] += 0.5 * np.conj(coeff)


def synthesize(c: np.ndarray, alpha: float, x: np.ndarray, z: np.ndarray, basis: str) -> np.ndarray:
    """Evaluate a real field at the tensor grid x (nx,) by z (nz,); returns (nx, nz)."""
    M = (c.shape[0] - 1) // 2
    N = c.shape[1] - 1
    ex = np.exp(1j * np.outer(np.asarray(x, float), wavenumbers(M, alpha)))
    nz = np.pi * np.outer(np.arange(N + 1), np.asarray(z, float))
    if basis == "cos":
        phi = np.cos(nz)
    elif basis == "sin":
        phi = np.sin(nz)
    else:
        raise ValueError("basis must be 'cos' or 'sin'")
    return (ex @ c @ phi).real


def synthesize_grid(state: SpectralState, nx: int, nz: int):
    """Sample (v, Theta) on a uniform nx-periodic by nz-inclusive grid."""
    x = np.arange(nx) * state.alpha / nx
    z = np.linspace(0.0, 1.0, nz)
    v = synthesize(state.v_hat, state.alpha, x, z, "cos")
    th = synthesize(state.theta_hat, state.alpha, x, z, "sin")
    return x, z, v, th

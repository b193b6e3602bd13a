"""Plain-text checkpoints that reload bit-for-bit.

Layout::

    thermoflow-checkpoint 1
    M N alpha t
    v m n re im
    ...
    theta m n re im

Floats are written with ``repr`` so parsing them back is exact.
"""

from __future__ import annotations

from pathlib import Path

from .spectral import SpectralState

MAGIC = "thermoflow-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(state: SpectralState, path) -> Path:
    path = Path(path)
    lines = [f"{MAGIC} {VERSION}", f"{state.M} {state.N} {state.alpha!r} {state.t!r}"]
    for name, c in (("v", state.v_hat), ("theta", state.theta_hat)):
        for i in range(c.shape[0]):
            m = i - state.M
            for n in range(c.shape[1]):
                z = complex(c[i, n])
                lines.append(f"{name} {m} {n} {z.real!r} {z.imag!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path) -> SpectralState:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith(MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint file")
    version = int(text[0].split()[1])
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    M_s, N_s, alpha_s, t_s = text[1].split()
    M, N = int(M_s), int(N_s)
    state = SpectralState.zeros(M, N, float(alpha_s), float(t_s))
    arrays = {"v": state.v_hat, "theta": state.theta_hat}
    seen = 0
    for line in text[2:]:
        if not line.strip():
            continue
        name, m, n, re, im = line.split()
        arrays[name][int(m) + M, int(n)] = complex(float(re), float(im))
        seen += 1
    if seen != 2 * (2 * M + 1) * (N + 1):
        raise CheckpointError(f"{path}: expected {2 * (2 * M + 1) * (N + 1)} coefficients, found {seen}")
    return state

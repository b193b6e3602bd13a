"""Reader for ``key = value`` parameter files.

Blank lines and anything after ``#`` are ignored.  All eleven keys are
required::

    t0, t1, depth_h, length_l, mu_x, mu_z, kappa_x, kappa_z, rho0, beta, g
"""

from __future__ import annotations

from pathlib import Path

from .params import PhysicalParams

KEYS = {
    "t0": "T0",
    "t1": "T1",
    "depth_h": "H",
    "length_l": "L",
    "mu_x": "mu_x",
    "mu_z": "mu_z",
    "kappa_x": "kappa_x",
    "kappa_z": "kappa_z",
    "rho0": "rho0",
    "beta": "beta",
    "g": "g",
}


class ConfigError(ValueError):
    pass


def parse_config(text: str, source: str = "<string>") -> PhysicalParams:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: {key} is not a number: {value!r}") from None
    missing = sorted(set(KEYS) - set(values))
    if missing:
        raise ConfigError(f"{source}: missing keys {', '.join(missing)}")
    try:
        return PhysicalParams(**{KEYS[k]: v for k, v in values.items()})
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> PhysicalParams:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def format_config(p: PhysicalParams) -> str:
    inverse = {v: k for k, v in KEYS.items()}
    return "".join(f"{inverse[attr]} = {getattr(p, attr)!r}\n" for attr in KEYS.values())

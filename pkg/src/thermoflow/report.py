"""CSV tables, JSON manifests and gnuplot scripts for run outputs."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__

TIMESERIES_COLUMNS = ["t", "l2_v", "l2_theta", "h1_v", "h1_theta", "h2_v", "h2_theta",
                      "x1", "x2", "energy_residual", "compat_residual"]
SPECTRUM_COLUMNS = ["m", "n", "a", "A", "B", "C", "beta_plus", "beta_minus"]


def _plain(value):
    """Convert numpy scalars, arrays and dataclasses into JSON-friendly objects."""
    if is_dataclass(value) and not isinstance(value, type):
        return _plain(asdict(value))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    return value


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row[c] for c in columns]
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return path


def read_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def write_timeseries(path, history) -> Path:
    rows = [{c: getattr(h, c) for c in TIMESERIES_COLUMNS} for h in history]
    return write_csv(path, TIMESERIES_COLUMNS, rows)


def write_manifest(path, kind: str, inputs: dict, outputs: list, results: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "tool": "thermoflow",
        "version": __version__,
        "kind": kind,
        "inputs": _plain(inputs),
        "outputs": [str(Path(o).name) for o in outputs],
        "results": _plain(results or {}),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def to_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True)


def gnuplot_contour(script_path, csv_name: str, title: str, xcol: int = 1, zcol: int = 2,
                    fcol: int = 3) -> Path:
    script = f"""set datafile separator ','
set title '{title}'
set xlabel 'x'
set ylabel 'z'
set view map
set contour base
set cntrparam levels 12
unset surface
set key off
splot '{csv_name}' every ::1 using {xcol}:{zcol}:{fcol} with lines
"""
    path = Path(script_path)
    path.write_text(script, encoding="utf-8")
    return path


def gnuplot_series(script_path, csv_name: str, title: str, ycols, logscale: bool = True,
                   xlabel: str = "t") -> Path:
    plots = ", ".join(f"'{csv_name}' every ::1 using 1:{c} with lines title columnhead({c})" for c in ycols)
    script = f"""set datafile separator ','
set title '{title}'
set xlabel '{xlabel}'
{"set logscale y" if logscale else ""}
plot {plots}
"""
    path = Path(script_path)
    path.write_text(script, encoding="utf-8")
    return path

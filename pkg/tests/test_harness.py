import json
from pathlib import Path

import numpy as np
import pytest

from thermoflow import report as rep
from thermoflow.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from thermoflow.cli import main
from thermoflow.config import ConfigError, format_config, load_config, parse_config
from thermoflow.dns import Simulation, SolverConfig, init_random
from thermoflow.experiments import critical_report, run_mc_sweep
from thermoflow.params import DimensionlessParams

ROOT = Path(__file__).resolve().parents[1]
DESK_CFG = ROOT / "configs" / "desk.cfg"
EXAMPLE_CFG = ROOT / "configs" / "example.cfg"


def test_config_round_trip(example_physical):
    text = format_config(example_physical)
    assert parse_config(text) == example_physical


def test_config_comments_and_case():
    text = format_config(load_config(DESK_CFG)).replace("t0 =", "T0 =") + "# trailing comment\n\n"
    assert parse_config(text) == load_config(DESK_CFG)


@pytest.mark.parametrize("mutate,message", [
    (lambda t: t + "t0 = 3\n", "duplicate"),
    (lambda t: t + "gamma = 3\n", "unknown"),
    (lambda t: t.replace("g = ", "# g = "), "missing"),
    (lambda t: t.replace("rho0 = 1.2", "rho0 = abc"), "not a number"),
    (lambda t: t + "nonsense\n", "key = value"),
    (lambda t: t.replace("depth_h = 1000.0", "depth_h = -1.0"), "example.cfg"),
])
def test_config_errors(mutate, message):
    text = mutate(EXAMPLE_CFG.read_text())
    with pytest.raises(ConfigError, match=message):
        parse_config(text, "example.cfg")


def test_checkpoint_bit_exact(tmp_path):
    d = DimensionlessParams(1.0, 1.0, 1.0, 2.0).with_rayleigh(25.0)
    s = init_random(0.3, 5, 4, 4, 2.0)
    sim = Simulation(s, d, SolverConfig(4, 4, 1e-3, 0.01))
    sim.run()
    path = save_checkpoint(sim.state, tmp_path / "state.ckpt")
    back = load_checkpoint(path)
    assert back.t == sim.state.t and back.alpha == sim.state.alpha
    np.testing.assert_array_equal(back.v_hat, sim.state.v_hat)
    np.testing.assert_array_equal(back.theta_hat, sim.state.theta_hat)


def test_checkpoint_errors(tmp_path):
    bad = tmp_path / "bad.ckpt"
    bad.write_text("hello\n")
    with pytest.raises(CheckpointError):
        load_checkpoint(bad)
    s = init_random(0.3, 5, 4, 4, 2.0)
    path = save_checkpoint(s, tmp_path / "s.ckpt")
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-3]) + "\n")
    with pytest.raises(CheckpointError, match="expected"):
        load_checkpoint(path)
    path.write_text("thermoflow-checkpoint 9\n4 4 2.0 0.0\n")
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)


def test_csv_and_manifest(tmp_path):
    p = rep.write_csv(tmp_path / "a.csv", ["x", "y"], [(0.1, 1), {"x": 0.2, "y": 2}])
    header, rows = rep.read_csv(p)
    assert header == ["x", "y"] and rows == [["0.1", "1"], ["0.2", "2"]]
    m = rep.write_manifest(tmp_path / "m.json", "test", {"a": np.float64(1.5), "b": np.arange(2)}, [p],
                           {"nan": float("nan")})
    doc = json.loads(m.read_text())
    assert doc["kind"] == "test" and doc["inputs"] == {"a": 1.5, "b": [0, 1]}
    assert doc["outputs"] == ["a.csv"] and doc["results"]["nan"] == "nan"


def test_gnuplot_scripts(tmp_path):
    a = rep.gnuplot_contour(tmp_path / "c.gp", "f.csv", "t")
    b = rep.gnuplot_series(tmp_path / "s.gp", "f.csv", "t", [2, 3])
    assert "splot 'f.csv'" in a.read_text()
    assert "set logscale y" in b.read_text() and "using 1:3" in b.read_text()


def test_critical_report_example(example_physical):
    out = critical_report(example_physical)
    assert out["m_c"] >= 1 and out["r_c"] > 0 and out["t_c"] > 0
    assert any("reference" in n.lower() or "differ" in n.lower() for n in out["notes"])


def test_mc_sweep(tmp_path):
    r = run_mc_sweep(np.linspace(1.0, 8.0, 8), [0.5, 1.0, 2.0], 1.0, m_max=200, out_dir=tmp_path)
    table = np.array(r.measured["table"])
    assert table.shape == (3, 8)
    assert np.all(np.diff(table, axis=1) >= 0)
    assert r.passed
    assert (tmp_path / "mc_sweep.csv").exists() and (tmp_path / "mc_sweep.manifest.json").exists()
    with pytest.raises(ValueError):
        run_mc_sweep([-1.0], [1.0], 1.0)


def test_cli_critical(capsys):
    assert main(["critical", "--config", str(DESK_CFG), "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["m_c"] == 1 and out["r_c"] == pytest.approx(2 * np.pi**2)


def test_cli_critical_text(capsys):
    assert main(["critical", "--config", str(EXAMPLE_CFG)]) == 0
    assert "T_c" in capsys.readouterr().out


def test_cli_spectrum(tmp_path, capsys):
    csv = tmp_path / "spec.csv"
    assert main(["spectrum", "--config", str(DESK_CFG), "--rayleigh", "25", "--mmax", "3", "--nmax", "2",
                 "--csv", str(csv)]) == 0
    header, rows = rep.read_csv(csv)
    assert header == rep.SPECTRUM_COLUMNS and len(rows) == 8
    assert "m=1, n=1" in capsys.readouterr().out


def test_cli_reduce(capsys):
    assert main(["reduce", "--super-eps", "0.01", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ring_radius"] == pytest.approx(1.786, abs=1e-3)
    assert main(["reduce", "--super-eps", "-0.5"]) == 0
    assert "none" in capsys.readouterr().out


def test_cli_cells(tmp_path, capsys):
    csv = tmp_path / "cells.csv"
    gp = tmp_path / "cells.gp"
    assert main(["cells", "--s1", "1", "--s2", "0", "--grid", "32,17", "--csv", str(csv),
                 "--plot-script", str(gp)]) == 0
    assert "cells = 2" in capsys.readouterr().out
    assert gp.exists() and len(rep.read_csv(csv)[1]) == 32 * 17


def test_cli_simulate(tmp_path, capsys):
    csv = tmp_path / "run.csv"
    ck = tmp_path / "run.ckpt"
    assert main(["simulate", "--modes", "4,4", "--tend", "0.01", "--dt", "0.001", "--init", "eigenmode",
                 "--delta", "0.01", "--rayleigh-factor", "1.1", "--csv", str(csv), "--checkpoint", str(ck)]) == 0
    header, rows = rep.read_csv(csv)
    assert header == rep.TIMESERIES_COLUMNS and len(rows) == 11
    assert load_checkpoint(ck).t == pytest.approx(0.01)
    doc = json.loads(csv.with_suffix(".manifest.json").read_text())
    assert doc["kind"] == "simulate"


def test_cli_sweep(tmp_path, capsys):
    assert main(["sweep", "--alpha", "1:4:4", "--pra", "1:1:1", "--kappa-a", "1", "--mmax", "50",
                 "--out", str(tmp_path)]) == 0
    assert "mc_sweep" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("t0 = 1\n")
    assert main(["critical", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["cells", "--s1", "1", "--s2", "0", "--grid", "32", "--csv", str(tmp_path / "x.csv")])

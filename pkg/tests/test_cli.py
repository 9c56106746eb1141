import json
import subprocess
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest

from attractor_lab import cli
from attractor_lab.config import from_mapping, load_config, parse_value
from attractor_lab.errors import ConfigError
from attractor_lab.serialize import (csv_text, fmt, matrix_from_json, matrix_to_json,
                                     read_csv, read_state_json)

ROOT = Path(__file__).resolve().parents[1]


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


BASIS = """
scenario = "basis"
output_dir = "{out}"
d = 4
[potential]
kind = "harmonic"
[grid]
x_min = -10.0
x_max = 10.0
n_points = 2001
"""

DISSIPATIVE = """
scenario = "dissipative"
output_dir = "{out}"
seed = 3
d = 4
[potential]
kind = "quartic"
[grid]
n_points = 401
[dynamics]
t_max = 2.0
n_steps = 20
stride = 10
noise = "sampled"
n_draws = 64
[initial]
kind = "random"
"""


def test_basis_scenario_energies(tmp_path):
    out = tmp_path / "out"
    cfg = load_config(write(tmp_path, BASIS.format(out=out)))
    report = cli.run_scenario(cfg)
    assert report.ok
    header, data = read_csv(out / "energies.csv")
    assert header == ["index", "energy"]
    assert np.allclose(data[:, 1], [0.5, 1.5, 2.5, 3.5], atol=1e-4)


def test_identical_runs_identical_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        cli.run_scenario(load_config(write(tmp_path, DISSIPATIVE.format(out=out), f"{out.name}.toml")))
    for name in ("trajectory.csv", "snapshots.json", "stderr.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_stride_snapshots(tmp_path):
    out = tmp_path / "o"
    cli.run_scenario(load_config(write(tmp_path, DISSIPATIVE.format(out=out))))
    snaps = json.loads((out / "snapshots.json").read_text())["snapshots"]
    assert [s["t"] for s in snaps] == pytest.approx([0.0, 1.0, 2.0])
    back = read_state_json(out / "snapshots.json")
    assert back.matrix.shape == (4, 4)


def test_snapshot_reimport_as_initial_state(tmp_path):
    out = tmp_path / "o"
    cli.run_scenario(load_config(write(tmp_path, DISSIPATIVE.format(out=out))))
    text = DISSIPATIVE.format(out=tmp_path / "o2").replace(
        'kind = "random"', f'kind = "file"\npath = "{out / "snapshots.json"}"')
    cfg = load_config(write(tmp_path, text, "again.toml"))
    f0 = cli.initial_state(cfg, None, None)
    first = json.loads((out / "snapshots.json").read_text())["snapshots"][0]["matrix"]
    assert np.array_equal(f0, matrix_from_json(first))


def test_json_matrix_lossless():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.array_equal(matrix_from_json(json.loads(json.dumps(matrix_to_json(m)))), m)


def test_csv_seventeen_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(1 / 3)) == 1 / 3
    assert csv_text(("a", "b"), [(1, 2.5)]) == "a,b\n1,2.5\n"


@pytest.mark.parametrize("text,msg", [
    ('scenario = "nope"', "scenario"),
    ('scenario = "basis"\nd = 4', "potential"),
    ('scenario = "basis"\n[potential]\nkind = "quartic"\n[grid]\nn_points = 10', "64"),
    ('scenario = "basis"\ncolor = 1\n[potential]\nkind = "quartic"', "unknown"),
    ('scenario = "basis"\n[potential]\nkind = "quartic"\n[dynamics]\nepsilon = -1.0', "epsilon"),
    ('scenario = "dissipative"\n[potential]\nkind = "quartic"\n[dynamics]\nnoise = "sampled"\n'
     '[initial]\nkind = "diagonal"\nvalues = [0.25, 0.25, 0.25, 0.25, 0.0, 0.0]', "seed"),
    ('scenario = "attractor"\n[potential]\nkind = "quartic"\n[initial]\nkind = "file"\n'
     'path = "missing.json"', "not found"),
    ('scenario = "basis"\n[potential]\nkind = "quartic"\n[grid]\nx_min = "a"', "number"),
    ('scenario = "beables"\n[flow]\nbeables = [[1.0, 2.0], [3.0]]\nomega0 = [1.0, 2.0]', "same"),
])
def test_config_errors(tmp_path, text, msg):
    with pytest.raises(ConfigError, match=msg):
        load_config(write(tmp_path, text))


def test_unparseable_toml(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "scenario = = 3"))


def test_malformed_config_exit_and_no_outputs(tmp_path):
    out = tmp_path / "never"
    p = write(tmp_path, f'scenario = "basis"\noutput_dir = "{out}"\nd = "four"\n')
    assert cli.main(["run", str(p)]) != 0
    assert not out.exists()


def test_validate_subcommand(tmp_path, capsys):
    p = write(tmp_path, BASIS.format(out=tmp_path / "x"))
    assert cli.main(["validate", str(p)]) == 0
    assert not (tmp_path / "x").exists()


def test_output_dir_env_override(tmp_path, monkeypatch):
    target = tmp_path / "env_out"
    monkeypatch.setenv("ATTRACTOR_LAB_OUTPUT_DIR", str(target))
    p = write(tmp_path, BASIS.format(out=tmp_path / "ignored"))
    assert cli.main(["run", str(p)]) == 0
    assert (target / "energies.csv").is_file()
    assert not (tmp_path / "ignored").exists()


def test_sweep(tmp_path):
    out = tmp_path / "sw"
    p = write(tmp_path, BASIS.format(out=out))
    assert cli.main(["sweep", str(p), "--param", "d", "--values", "2,3"]) == 0
    _, a = read_csv(out / "d=2" / "energies.csv")
    _, b = read_csv(out / "d=3" / "energies.csv")
    assert len(a) == 2 and len(b) == 3


def test_sweep_bad_value_writes_nothing(tmp_path):
    out = tmp_path / "sw"
    p = write(tmp_path, BASIS.format(out=out))
    assert cli.main(["sweep", str(p), "--param", "grid.n_points", "--values", "801,12"]) != 0
    assert not out.exists()


def test_outputs_of_other_scenario_protected(tmp_path):
    out = tmp_path / "shared"
    cli.run_scenario(load_config(write(tmp_path, BASIS.format(out=out))))
    text = DISSIPATIVE.format(out=out)
    with pytest.raises(ConfigError):
        cli.run_scenario(load_config(write(tmp_path, text, "d.toml")))


def test_parse_value():
    assert parse_value("3") == 3
    assert parse_value("0.25") == 0.25
    assert parse_value("true") is True
    assert parse_value("sampled") == "sampled"


def test_example_configs_validate():
    for path in sorted((ROOT / "configs").glob("*.toml")):
        load_config(path)


def test_module_entry_point(tmp_path):
    p = write(tmp_path, BASIS.format(out=tmp_path / "m"))
    res = subprocess.run([sys.executable, "-m", "attractor_lab", "run", str(p)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "orthonormality_error" in res.stdout


@pytest.mark.parametrize("name", ["prequantum_basin", "beables_pair", "parity_quartic",
                                  "delta_quartic", "attractor_quartic"])
def test_example_scenarios_pass(tmp_path, monkeypatch, name):
    monkeypatch.setenv("ATTRACTOR_LAB_OUTPUT_DIR", str(tmp_path / name))
    report = cli.run_scenario(load_config(ROOT / "configs" / f"{name}.toml"))
    assert report.ok, report.render()

import json

import numpy as np
import pytest
from click.testing import CliRunner

from cauchylens import generators
from cauchylens.calculus import build_calculus
from cauchylens.cli import main
from cauchylens.phasespace import PhaseSpace
from cauchylens.sampling import random_homogeneous
from cauchylens.simplicial import to_off
from cauchylens.states import QuasiFreeState, save_mu

SMALL = "builtin:annulus:n_radial=3,n_angular=12"


@pytest.fixture
def runner():
    return CliRunner()


def test_mesh_summary(runner):
    res = runner.invoke(main, ["mesh", "--mesh", SMALL])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["boundary_circles"] == 2 and doc["euler_characteristic"] == 0


def test_mesh_file_round_trip(runner, tmp_path):
    res = runner.invoke(main, ["mesh", "--mesh", SMALL, "--format", "off", "--out", str(tmp_path)])
    assert res.exit_code == 0
    res = runner.invoke(main, ["mesh", "--mesh", str(tmp_path / "mesh.off")])
    assert res.exit_code == 0 and json.loads(res.output)["boundary_circles"] == 2


def test_verify_pass_and_determinism(runner):
    args = ["verify", "--mesh", SMALL, "--suite", "green,weyl", "--seed", "7"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == 0, first.output
    assert first.output == second.output
    assert first.output.startswith("# seed=7\nsuite,case,quantity,value,tolerance,pass\n")


def test_verify_failure_exit_code(runner):
    res = runner.invoke(main, ["verify", "--mesh", SMALL, "--suite", "chh", "--tol-sym", "1e-300"])
    assert res.exit_code == 1
    assert ",false" in res.output


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "--suite", "nonsense"],
        ["verify", "--mesh", "no_such_mesh.off"],
        ["mesh", "--mesh", "builtin:annulus:n_radial=x"],
        ["glue", "--mesh1", "a.off"],
    ],
)
def test_bad_input_exit_code(runner, args):
    assert runner.invoke(main, args).exit_code == 2


def test_config_files(runner, tmp_path):
    toml = tmp_path / "lens.toml"
    toml.write_text(f'mesh = "{SMALL}"\nsuite = "green"\nseed = 3\n')
    res = runner.invoke(main, ["--config", str(toml), "verify"])
    assert res.exit_code == 0 and res.output.startswith("# seed=3")
    js = tmp_path / "lens.json"
    js.write_text(json.dumps({"mesh": SMALL, "suite": "green", "seed": 3}))
    assert runner.invoke(main, ["--config", str(js), "verify"]).output == res.output
    js.write_text(json.dumps({"colour": "red"}))
    assert runner.invoke(main, ["--config", str(js), "verify"]).exit_code == 2
    js.write_text("{not json")
    assert runner.invoke(main, ["--config", str(js), "verify"]).exit_code == 2


def test_decompose(runner, tmp_path):
    m = generators.from_spec(SMALL[len("builtin:"):])
    c = build_calculus(m)
    data = random_homogeneous(c, np.random.default_rng(0))
    path = tmp_path / "data.json"
    path.write_text(json.dumps(data.to_json()))
    res = runner.invoke(main, ["decompose", "--mesh", SMALL, "--data", str(path)])
    assert res.exit_code == 0
    coords = json.loads(res.output)
    assert set(coords) == {"F", "H", "f", "h"}
    path.write_text(json.dumps({"A": [0.0], "E": [0.0]}))
    assert runner.invoke(main, ["decompose", "--mesh", SMALL, "--data", str(path)]).exit_code == 2


def test_state_command(runner, tmp_path):
    res = runner.invoke(main, ["state", "--mesh", SMALL])
    assert res.exit_code == 0, res.output
    ps = PhaseSpace(build_calculus(generators.from_spec(SMALL[len("builtin:"):])))
    bad = QuasiFreeState(ps.space, 0.2 * np.eye(ps.dim), check=False)
    save_mu(bad, tmp_path / "mu.mtx")
    res = runner.invoke(main, ["state", "--mesh", SMALL, "--mu", str(tmp_path / "mu.mtx")])
    assert res.exit_code == 1


def test_spectrum_and_relativize(runner):
    res = runner.invoke(main, ["spectrum", "--mesh", SMALL])
    assert res.exit_code == 0
    rows = res.output.strip().splitlines()
    assert rows[0] == "index,eigenvalue" and abs(float(rows[1].split(",")[1])) < 1e-10
    res = runner.invoke(main, ["relativize", "--mesh", SMALL, "--seed", "1"])
    assert res.exit_code == 0
    last = res.output.strip().splitlines()[-1]
    assert float(last.split(",")[1]) < 1e-12


def test_glue_default_and_files(runner, tmp_path):
    res = runner.invoke(main, ["glue", "--labels", "2", "--mode", "mix"])
    assert res.exit_code == 0, res.output
    assert len(res.output.strip().splitlines()) == 4
    split = generators.split_sphere(n_lat=6, n_lon=16)
    (tmp_path / "a.off").write_text(to_off(split.sides[0]))
    (tmp_path / "b.off").write_text(to_off(split.sides[1]))
    (tmp_path / "m.json").write_text(json.dumps({"vertex_pairs": np.asarray(split.vertex_pairs).tolist()}))
    res = runner.invoke(main, ["glue", "--mesh1", str(tmp_path / "a.off"), "--mesh2", str(tmp_path / "b.off"), "--match", str(tmp_path / "m.json"), "--labels", "1"])
    assert res.exit_code == 0, res.output

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from circleflow import cli
from circleflow import complex as C


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.mark.parametrize("text,value", [("pi/2", math.pi / 2), ("2pi/3", 2 * math.pi / 3),
                                        ("2*pi/3", 2 * math.pi / 3), ("pi", math.pi), ("-pi/4", -math.pi / 4),
                                        ("1.5707963", 1.5707963), (" 0.5 * pi ", 0.5 * math.pi)])
def test_parse_angle(text, value):
    assert cli.parse_angle(text) == value


def test_parse_angle_rejects():
    with pytest.raises(cli.UsageError):
        cli.parse_angle("half a turn")


def test_generate_z2(tmp_path):
    out = tmp_path / "z.json"
    assert run("generate", "z2_lattice", "--radius", 6, "--theta", 1.5707963, "-o", out) == 0
    cx = C.load(out)
    assert C.validate_c1(cx, tol=1e-6) == []
    assert run("validate", out) == 2          # 1.5707963 misses pi/2 by more than the default tolerance
    run("generate", "z2_lattice", "--radius", 6, "--theta", "pi/2", "-o", out)
    assert run("validate", out) == 0


def test_generate_hex(tmp_path, capsys):
    out = tmp_path / "h.json"
    assert run("generate", "hex_lattice", "--depth", 1, "--theta", 2.0943951, "-o", out) == 0
    cx = C.load(out)
    for v in sorted(cx.interior_vertices):
        assert C.normalized_character(cx, cx.vertex_ids[v]) == pytest.approx(math.pi / 3, abs=1e-6)


def test_generate_errors(capsys):
    assert run("generate", "klein_bottle") == 1
    assert run("generate", "cube", "--radius", 3) == 1
    assert run("flow") == 1
    assert "error" in capsys.readouterr().err


def test_flow_euclidean(tmp_path):
    z = tmp_path / "z.json"
    run("generate", "z2_lattice", "--radius", 8, "-o", z)
    out = tmp_path / "run"
    code = run("flow", z, "--out", out, "--geometry", "euclidean", "--theta-const", "pi/2",
               "--perturb", 0.05, "--free-radius", 6)
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["summary"]["converged"]
    assert man["resolved"]["init"] == "perturb"
    assert "started" in man and "finished" in man
    assert run("analyze", out) == 0
    assert run("render", out, "--decay-plot", tmp_path / "decay.svg", "--triangulation") == 0
    assert (out / "layout.svg").read_text().count("<circle") > 100
    assert (tmp_path / "decay.svg").exists()


def test_flow_hyperbolic_character(tmp_path):
    h = tmp_path / "h.json"
    run("generate", "hex_lattice", "--depth", 2, "-o", h)
    out = tmp_path / "run"
    assert run("flow", h, "--out", out, "--geometry", "hyperbolic", "--init", "character", "--c-hat", 0.5) == 0
    z = np.load(out / "trace.npz")
    assert np.max(z["K_free"]) <= 1e-8
    assert run("render", out) == 0
    assert 'r="1.0000"' in (out / "layout.svg").read_text()   # the boundary of the disk


def test_flow_prescribed_curvature(tmp_path):
    o = tmp_path / "o.json"
    run("generate", "octahedron", "--theta", "pi/3", "--infinity-face", 0, "-o", o)
    out = tmp_path / "run"
    assert run("flow", o, "--out", out, "--k-hat", "from-infinity-marks") == 0


def test_unconverged_exit_code(tmp_path):
    z = tmp_path / "z.json"
    run("generate", "z2_lattice", "--radius", 6, "-o", z)
    out = tmp_path / "run"
    assert run("flow", z, "--out", out, "--perturb", 0.05, "--free-radius", 4, "--t-max", 0.1) == 2
    assert run("render", out) == 2
    assert run("render", out, "--force") in (0, 2)


def test_config_precedence(tmp_path):
    z = tmp_path / "z.json"
    run("generate", "z2_lattice", "--radius", 6, "-o", z)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"t_max": 0.1, "perturb": 0.05, "init": "perturb", "free_radius": 3}))
    out = tmp_path / "a"
    assert run("flow", z, "--out", out, "--config", cfg) == 2
    assert json.loads((out / "manifest.json").read_text())["resolved"]["t_max"] == 0.1
    out = tmp_path / "b"
    assert run("flow", z, "--out", out, "--config", cfg, "--t-max", 1e4) == 0
    assert json.loads((out / "manifest.json").read_text())["resolved"]["t_max"] == 1e4
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("flow", z, "--out", tmp_path / "c", "--config", cfg) == 1


def test_fixed_step_traces_are_byte_identical(tmp_path):
    z = tmp_path / "z.json"
    run("generate", "z2_lattice", "--radius", 6, "-o", z)
    args = ["--perturb", 0.05, "--free-radius", 4, "--integrator", "rk4", "--dt", 0.05, "--seed", 3]
    run("flow", z, "--out", tmp_path / "a", *args)
    run("flow", z, "--out", tmp_path / "b", *args)
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_polyhedron_command(tmp_path):
    c = tmp_path / "cube.json"
    run("generate", "cube", "-o", c)
    out = tmp_path / "poly.json"
    assert run("polyhedron", c, "--theta", "2pi/3", "-o", out) == 0
    doc = json.loads(out.read_text())
    assert doc["max_dihedral_error"] < 1e-8
    assert len(doc["ideal_vertices"]) == 8
    # right angles at a cube vertex sum to 3 pi / 2, not 2 pi
    assert run("polyhedron", c, "-o", out) == 1


def test_missing_inputs(tmp_path):
    assert run("flow", tmp_path / "nope.json", "--out", tmp_path / "x") == 1
    assert run("analyze", tmp_path) == 1


def test_exhaustion_sweep(tmp_path):
    z = tmp_path / "z.json"
    run("generate", "z2_lattice", "--radius", 8, "-o", z)
    out = tmp_path / "run"
    assert run("flow", z, "--out", out, "--perturb", 0.05, "--free-radius", 4, "--exhaustion", "4,6") == 0
    man = json.loads((out / "manifest.json").read_text())
    assert len(man["exhaustion"]["deltas"]) == 1


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "circleflow.cli", "generate", "cube"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["name"]

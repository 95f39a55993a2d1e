import json
import shutil
import subprocess

import pytest

from haarlab.cli import main
from haarlab.haar import HaarVector
from haarlab.dyadic import Interval
from haarlab.io import write_haar


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_gen_tau_then_c1(tmp_path, capsys):
    t = tmp_path / "tau.txt"
    assert run(capsys, "gen-tau", "--kind", "blockshift", "--depth", "2", "--seed", "1", "--out", str(t))[0] == 0
    code, out = run(capsys, "c1", "--tau", str(t), "--carleson")
    data = json.loads(out.out)
    assert code == 0 and data["c1"] == "1/2^0" and data["carleson_ratio"] == "1/2^0"


def test_carleson(capsys):
    code, out = run(capsys, "carleson", "--collection", "0:0,1:0,2:0")
    assert code == 0 and json.loads(out.out)["carleson_constant"] == "7/2^2"


def test_bad_input_exit_code(capsys):
    code, out = run(capsys, "carleson", "--collection", "0:0,0:0")
    assert code == 2 and "duplicate" in out.err


def test_mu_csv(capsys, tmp_path):
    t = tmp_path / "tau.txt"
    t.write_text("depth 2\n0:0 -> 0:0\n1:0 -> 2:0\n2:0 -> 1:0\n")
    code, out = run(capsys, "mu", "--tau", str(t), "--H", "2:0,1:0", "--format", "csv")
    assert code == 0
    assert out.out.splitlines() == ["cell,mu", "0,2.0", "1,0.5", "2,0.0", "3,0.0"]


def test_atoms_and_norm(capsys, tmp_path):
    f = tmp_path / "f.txt"
    write_haar(f, HaarVector.scalar({Interval(0, 0): 1.0, Interval(1, 0): 8.0}))
    code, out = run(capsys, "atoms", "--f", str(f), "--p", "1")
    assert code == 0 and json.loads(out.out)["validation"]["passed"]
    code, out = run(capsys, "norm", "--f", str(f), "--p", "1,2")
    assert code == 0 and len(json.loads(out.out)["rows"]) == 2


def test_opnorm_sweep_and_type_witness(capsys):
    code, out = run(capsys, "opnorm", "--kind", "levelperm", "--depth", "2", "--p", "2", "--restarts", "2")
    assert code == 0 and json.loads(out.out)["rows"][0]["lower_bound"] == pytest.approx(1.0)
    code, out = run(capsys, "sweep", "--depth", "2", "--p", "1.5", "--q", "1", "--restarts", "2",
                    "--format", "csv")
    assert code == 0 and out.out.startswith("bound,")
    code, out = run(capsys, "type-witness", "--kind", "levelperm", "--depth", "2", "--n", "2", "--compare")
    assert code == 0 and json.loads(out.out)["T_s_equals_rho"]


def test_verify_writes_deterministic_file(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "verify", "maximal", "--cases", "5", "--out", str(a))[0] == 0
    assert run(capsys, "verify", "maximal", "--cases", "5", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["passed"]


@pytest.mark.skipif(shutil.which("haarlab") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["haarlab", "c1", "--kind", "levelperm", "--depth", "1"], capture_output=True, text=True)
    assert out.returncode == 0 and '"c1": "1/2^0"' in out.stdout

import json
import subprocess
import sys

import numpy as np
import pytest

from selfaffine.cli import main
from selfaffine.ifs import dump_ifs


@pytest.fixture
def files(tmp_path, uniform, diag23, golden):
    out = {}
    for name, ifs in (("bc_half", uniform), ("diag23", diag23), ("golden", golden)):
        path = tmp_path / f"{name}.json"
        dump_ifs(ifs, path)
        out[name] = str(path)
    return out


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_transform_row(files, capsys):
    code, out, _ = run(["transform", "--ifs", files["bc_half"], "--xi", "0.25"], capsys)
    assert code == 0
    head, row = out.strip().splitlines()
    assert head == "xi,re,im,modulus,terms,bound"
    assert abs(float(row.split(",")[3]) - 0.63662) < 1e-5


def test_transform_vector_frequencies(files, capsys):
    code, out, _ = run(["transform", "--ifs", files["diag23"], "--xi", "1,2", "--xi", "3,4,5,6"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 4
    code, _, err = run(["transform", "--ifs", files["diag23"], "--xi", "1,2,3"], capsys)
    assert code == 2 and "usage" in err


def test_pisot_check(capsys):
    code, out, _ = run(["pisot-check", "--poly", "1,-1,-1"], capsys)
    assert code == 0 and json.loads(out)["decision"] == "yes"
    code, out, _ = run(["pisot-check", "--poly", "1,0,-3"], capsys)
    doc = json.loads(out)
    assert doc["decision"] == "no" and doc["failed_clause"]
    code, out, _ = run(["pisot-check", "--poly", "1,-1,-1", "--thetas", "1.618033988749895,-0.6180339887498949"], capsys)
    assert json.loads(out)["failed_clause"] == "(i)"


def test_argument_errors(files, capsys):
    assert run(["transform", "--bogus"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2
    assert run(["transform", "--ifs", "/no/such.json", "--xi", "1"], capsys)[0] == 2
    assert run(["pisot-check", "--poly", "2,1"], capsys)[0] == 2


def test_computation_errors(capsys):
    code, _, err = run(["ek-trace", "--theta", "2", "--eta", "1", "--n", "60"], capsys)
    assert code == 1 and "horizon too deep" in err
    code, _, err = run(["pisot-check", "--poly", "1,0,-4"], capsys)
    assert code == 1 and "minimal polynomial" in err


def test_ek_trace(capsys):
    code, out, _ = run(["ek-trace", "--theta", "1.618", "--eta", "1", "--n", "25"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "n,K,eps" and len(lines) == 27
    assert lines[5].split(",")[:2] == ["4", "7"]


def test_ek_cover(capsys):
    code, out, _ = run(["ek-cover", "--b1", "1.5", "--b2", "2", "--c1", "0.3", "--n", "10",
                        "--delta", "0.125", "--rho", "0.05"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["sequence_count"] == len(doc["intervals"]) > 0
    assert {"constant", "radius_constant", "branching"} <= set(doc)


def test_ek_cover_default_rho(capsys):
    code, out, _ = run(["ek-cover", "--b1", "1.5", "--b2", "2", "--n", "8"], capsys)
    doc = json.loads(out)
    assert code == 0 and 0 < doc["query"]["rho"] <= 0.5
    assert doc["rho_source"] == "predictor_consistency_scan"


def test_decay_and_orbit(files, capsys):
    code, out, _ = run(["decay-scan", "--ifs", files["bc_half"], "--samples", "128", "--seed", "3"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "R,shell_sup,samples" and lines[-1].startswith("# alpha_fit=")
    assert len(lines) == 10
    code, out, _ = run(["orbit-trace", "--ifs", files["golden"], "--base", "1.618033988749895", "--n", "25"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 27


def test_sample_and_manifest(files, tmp_path, capsys):
    dest = tmp_path / "pts.csv"
    code, out, _ = run(["sample", "--ifs", files["diag23"], "--n", "100", "--seed", "4", "--out", str(dest)], capsys)
    assert code == 0 and out == ""
    pts = np.loadtxt(dest, delimiter=",", skiprows=1)
    assert pts.shape == (100, 2)
    man = json.loads((tmp_path / "pts.csv.manifest.json").read_text())
    assert man["subcommand"] == "sample" and man["seed"] == 4 and man["parameters"]["n"] == 100


def test_verify(files, capsys):
    code, out, _ = run(["verify", "--ifs", files["diag23"], "--xi", "5.5,2.25", "--xi", "100000,3"], capsys)
    rows = out.strip().splitlines()[1:]
    assert code == 0 and len(rows) == 6 and all(r.endswith(",1") for r in rows)
    code, _, err = run(["verify", "--ifs", files["diag23"], "--xi", "5.5,2.25", "--tol", "1e-30"], capsys)
    assert code == 1 and "exceeded" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "selfaffine", "pisot-check", "--poly", "1,-2"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["decision"] == "yes"

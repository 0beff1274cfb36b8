import json
import subprocess
import sys
from importlib import resources


from enfcheck.cli import main

MP = str(resources.files("enfcheck").joinpath("data", "mediaplayer.enf"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_exit_codes(capsys):
    assert run(capsys, "verify", MP, "pair")[0] == 1
    assert run(capsys, "verify", MP, "p1_only")[0] == 0
    assert run(capsys, "verify", MP, "forwarder_only")[0] == 1


def test_verify_text(capsys):
    code, out, _ = run(capsys, "verify", MP, "pair")
    assert "interference YES" in out and "refused: stop-MediaPlayer" in out


def test_verify_json_is_reproducible(capsys):
    _, a, _ = run(capsys, "verify", MP, "pair", "--format", "json", "--no-timing")
    _, b, _ = run(capsys, "--backend", "python", "verify", MP, "pair", "--format", "json", "--no-timing")
    assert a == b
    data = json.loads(a)
    assert data["interference"] == "yes" and data["stats"] == {"states": 22, "edges": 28}


def test_verify_strict_override(capsys):
    code, out, _ = run(capsys, "verify", MP, "pair", "--completion", "strict", "--format", "json")
    assert code in (0, 1) and json.loads(out)["stats"]["states"] > 0


def test_bound_and_errors(capsys, tmp_path):
    code, _, err = run(capsys, "verify", MP, "pair", "--max-states", "3")
    assert code == 2 and "exceeds the bound of 3" in err
    assert run(capsys, "verify", MP, "nope")[0] == 2
    assert run(capsys, "verify", str(tmp_path / "missing.enf"), "pair")[0] == 2
    bad = tmp_path / "bad.enf"
    bad.write_text("lts L { initial 0 }\n")
    code, _, err = run(capsys, "transform", str(bad), "L")
    assert code == 2 and "1:" in err


def test_transform_outputs(capsys, tmp_path):
    code, out, err = run(capsys, "transform", MP, "EA_p1", "--completion", "strict")
    assert code == 0 and "9 states, 6 committed, 11 transitions" in out and "warning" in err
    target = tmp_path / "p1.dot"
    assert run(capsys, "transform", MP, "EA_p1", "--format", "dot", "-o", str(target))[0] == 0
    assert target.read_text().startswith("digraph")


def test_simulate(capsys):
    code, a, _ = run(capsys, "simulate", MP, "pair", "--seed", "3", "--steps", "20", "--format", "json")
    _, b, _ = run(capsys, "simulate", MP, "pair", "--seed", "3", "--steps", "20", "--format", "json")
    assert code == 0 and a == b
    walk = json.loads(a)
    assert walk["seed"] == 3 and walk["outcome"] in ("running", "deadlocked")
    code, _, err = run(capsys, "simulate", MP, "pair", "--steps", "-1")
    assert code == 2 and "usage" in err


def test_catalog_commands(capsys):
    code, out, _ = run(capsys, "catalog", "--list")
    assert code == 0 and out.strip().endswith("10 APIs, 25 policies")
    code, out, _ = run(capsys, "catalog", "--run-table1")
    assert code == 0 and "5/10 interferences" in out
    code, out, _ = run(capsys, "catalog", "--run-table1", "--format", "json", "--no-timing")
    data = json.loads(out)
    assert data["summary"] == "5/10 interferences" and len(data["rows"]) == 10
    code, out, _ = run(capsys, "catalog", "--emit", "Camera")
    assert code == 0 and "network all {" in out
    assert run(capsys, "catalog")[0] == 2
    assert run(capsys, "catalog", "--emit", "Toaster")[0] == 2


def test_catalog_inconclusive(capsys):
    assert run(capsys, "catalog", "--run-table1", "--max-states", "10")[0] == 2


def test_export_dot(capsys):
    code, out, _ = run(capsys, "export-dot", MP, "pair")
    assert code == 0 and "doubleoctagon" in out
    assert "shape=box" in run(capsys, "export-dot", MP, "EA_p2", "--io")[1]
    assert run(capsys, "export-dot", MP, "MediaPlayer")[0] == 0
    assert run(capsys, "export-dot", MP, "nothing")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, )[0] == 2
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "enfcheck", "verify", MP, "pair"], capture_output=True, text=True)
    assert proc.returncode == 1 and "interference YES" in proc.stdout

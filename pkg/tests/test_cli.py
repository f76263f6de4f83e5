import json
import os
import subprocess
import sys

import pytest

from orbitcoh.cli import main


def run_cli(args, tmp_path=None):
    """Run in-process, capturing stdout and the exit code."""
    import io
    from contextlib import redirect_stdout, redirect_stderr
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(args)
    return code, out.getvalue(), err.getvalue()


def test_betti_complete2(tmp_path):
    out = tmp_path / "b.json"
    code, text, _ = run_cli(["betti", "--complete", "2", "--k", "2", "--m", "2",
                             "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["poincare"] == [1, 0, 0, 4, 4, 1]


def test_betti_graph_file_k1(tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"n": 3, "edges": [[1, 2], [1, 3], [2, 3]]}))
    out = tmp_path / "b.json"
    code, _, _ = run_cli(["betti", "--graph", str(g), "--k", "1", "--m", "2",
                          "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["poincare"] == [1, 0, 0, 3, 0, 0, 2]


def test_betti_text_output():
    code, text, _ = run_cli(["betti", "--complete", "2", "--k", "2", "--m", "2"])
    assert code == 0
    assert "poincare: 1 + 4*t^3 + 4*t^4 + t^5" in text


def test_betti_bad_k():
    code, _, err = run_cli(["betti", "--complete", "2", "--k", "0", "--m", "2"])
    assert code == 2


def test_betti_missing_graph():
    code, _, _ = run_cli(["betti", "--k", "2", "--m", "2"])
    assert code == 2


def test_betti_real_forces_k2():
    code, _, _ = run_cli(["betti", "--complete", "2", "--k", "3", "--m", "2",
                          "--mode", "real"])
    assert code == 2


def test_ring_complete2(tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["ring", "--complete", "2", "--k", "2", "--m", "2",
                          "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert len(data["basis"]) == 10
    assert len({e["grading"] for e in data["basis"]}) == 10
    assert data["poincare"] == [1, 0, 0, 4, 4, 1]


def test_ring_real(tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["ring", "--complete", "2", "--m", "2",
                          "--mode", "real", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["poincare"] == [1, 9]


def test_ring_m1_unsupported():
    code, _, _ = run_cli(["ring", "--complete", "2", "--k", "2", "--m", "1"])
    assert code == 3


def test_verify_complete2():
    code, text, _ = run_cli(["verify", "--complete", "2", "--k", "2", "--m", "2"])
    assert code == 0
    assert "PASS" in text and "FAIL" not in text


def test_verify_oracle_limit():
    code, _, err = run_cli(["verify", "--complete", "3", "--k", "3", "--m", "2",
                            "--oracle-limit", "50"])
    assert code == 3


def poset_json():
    return {
        "elements": ["a", "b", "c", "d", "T"],
        "covers": [["a", "c"], ["b", "d"], ["c", "T"], ["d", "T"]],
        "rank": [0, 0, 1, 1, 2],
    }


def test_cellular_pi3_ranks(tmp_path):
    # delta^bottom on the partition lattice of 3 gives OS ranks (1, 3, 2)
    elements = ["bot", "a12", "a13", "a23", "top"]
    covers = [["bot", "a12"], ["bot", "a13"], ["bot", "a23"],
              ["a12", "top"], ["a13", "top"], ["a23", "top"]]
    poset = {"elements": elements, "covers": covers, "rank": [0, 1, 1, 1, 2]}
    # ranks parallel the poset's sorted labels
    ranks = [1 if lab == "bot" else 0 for lab in sorted(elements)]
    cop = {"ranks": ranks, "extensions": {}}
    pf = tmp_path / "p.json"
    cf = tmp_path / "g.json"
    pf.write_text(json.dumps(poset))
    cf.write_text(json.dumps(cop))
    out = tmp_path / "form.json"
    code, _, _ = run_cli(["cellular", "--poset", str(pf),
                          "--copresheaf", str(cf), "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["cellular"] is True
    ranks = data["piece_ranks"]
    assert ranks["bot"] == 1
    assert ranks["a12"] == ranks["a13"] == ranks["a23"] == 1
    assert ranks["top"] == 2


def test_cellular_failure_exit1(tmp_path):
    pf = tmp_path / "p.json"
    cf = tmp_path / "g.json"
    pf.write_text(json.dumps(poset_json()))
    # constant copresheaf needs identity extensions on every cover
    ext = {}
    for lo, hi in poset_json()["covers"]:
        ext[f"{lo}->{hi}"] = [[1]]
    cf.write_text(json.dumps({"ranks": [1] * 5, "extensions": ext}))
    code, text, _ = run_cli(["cellular", "--poset", str(pf),
                             "--copresheaf", str(cf)])
    assert code == 1
    assert "kernel-sum" in text and "T" in text


def test_cellular_bad_json(tmp_path):
    pf = tmp_path / "p.json"
    pf.write_text("{not json")
    code, _, _ = run_cli(["cellular", "--poset", str(pf), "--copresheaf", str(pf)])
    assert code == 2


def test_cli_determinism_across_hash_seeds(tmp_path):
    """Byte-identical output under different PYTHONHASHSEED values."""
    env = dict(os.environ)
    outputs = []
    for seed in ("0", "424242"):
        env["PYTHONHASHSEED"] = seed
        proc = subprocess.run(
            [sys.executable, "-m", "orbitcoh.cli", "ring", "--complete", "2",
             "--k", "2", "--m", "2"],
            capture_output=True, env=env, cwd=os.path.dirname(__file__))
        assert proc.returncode == 0
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1]


def test_cli_json_determinism(tmp_path):
    env = dict(os.environ)
    blobs = []
    for seed in ("1", "99"):
        out = tmp_path / f"o{seed}.json"
        env["PYTHONHASHSEED"] = seed
        proc = subprocess.run(
            [sys.executable, "-m", "orbitcoh.cli", "verify", "--complete", "2",
             "--k", "2", "--m", "2", "--out", str(out)],
            capture_output=True, env=env)
        assert proc.returncode == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]

import csv
import json
import subprocess
import sys

import pytest

from rwcollide import __version__
from rwcollide.chainio import read_chain
from rwcollide.cli import RunConfig, UsageError, main, parse_args


def _run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_gen_and_analyze(tmp_path, capsys):
    path = tmp_path / "q3.chain"
    code, out, _ = _run(capsys, "gen", "--family", "hypercube", "--d", "3", "--eps", "0.3", "-o", str(path))
    assert code == 0 and read_chain(path).n == 8
    rep = tmp_path / "a.json"
    code, out, _ = _run(capsys, "analyze", str(path), "--spectral", "--hitting", "--structure", "--json", str(rep))
    assert code == 0 and "t*_hit" in out and "transitive" in out
    env = json.loads(rep.read_text())
    assert set(env) == {"tool_version", "config", "checks", "artifacts"}
    assert env["tool_version"] == __version__
    assert {a["kind"] for a in env["artifacts"]} >= {"spectral", "hitting", "structure"}


def test_analyze_cdf_csv(tmp_path, capsys):
    out_csv = tmp_path / "cdf.csv"
    code, out, _ = _run(capsys, "analyze", "complete", "--n", "4", "--cdf", "0", "1", "--t-end", "3",
                        "--points", "7", "--csv", str(out_csv))
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "value", "err_bound"] and len(rows) == 8
    code, _, _ = _run(capsys, "analyze", "cycle", "--n", "5", "--meeting", "0", "2", "--ly", "1", "--lz", "0.5")
    assert code == 0
    code, _, err = _run(capsys, "analyze", "cycle", "--n", "5", "--cdf", "0", "9")
    assert code == 2 and "--cdf" in err


def test_collide_exact_and_both(tmp_path, capsys):
    code, out, _ = _run(capsys, "collide", "complete", "--n", "4", "--lz", "0")
    assert code == 0 and "exact P = 0.375" in out
    rep = tmp_path / "c.json"
    code, out, _ = _run(capsys, "collide", "complete", "--n", "4", "--method", "both", "--samples", "20000",
                        "--seed", "3", "--json", str(rep))
    assert code == 0 and "seed: 3" in out
    env = json.loads(rep.read_text())
    assert env["checks"][0]["pass"] is True
    assert env["config"]["capacity_source"] == "default"
    code, out, _ = _run(capsys, "collide", "complete", "--n", "4", "--start", "0,1,2")
    assert "0.5" in out


def test_collide_capacity(capsys, monkeypatch):
    code, _, err = _run(capsys, "collide", "cycle", "--n", "10", "--capacity", "100")
    assert code == 2 and "CapacityExceeded" in err
    monkeypatch.setenv("RWCOLLIDE_CAPACITY", "50")
    code, out, err = _run(capsys, "collide", "cycle", "--n", "4")
    assert code == 2 and "env RWCOLLIDE_CAPACITY" in out


def test_mc_csv(tmp_path, capsys):
    out_csv = tmp_path / "mc.csv"
    code, out, _ = _run(capsys, "mc", "cycle", "--n", "6", "--samples", "500", "--seed", "4", "--csv", str(out_csv))
    assert code == 0 and "seed: 4" in out
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 1 and rows[0]["n_samples"] == "500" and rows[0]["seed"] == "4"


def test_verify_commands(tmp_path, capsys):
    rep = tmp_path / "v.json"
    code, out, _ = _run(capsys, "verify", "thm1", "--families", "cycle:3..5", "--json", str(rep))
    assert code == 0 and "passed 3" in out
    env = json.loads(rep.read_text())
    assert all(c["pass"] in (True, None) or c["kind"] == "evidence" for c in env["checks"])
    code, out, _ = _run(capsys, "verify", "nonreversible", "--n-list", "4,12", "--samples", "3000")
    assert "seed: 0" in out


@pytest.mark.parametrize("argv, flag", [
    (["collide", "cycle"], "--n"),
    (["collide", "hypercube", "--n", "3"], "--d"),
    (["collide", "cycle", "--n", "5", "--ly", "-1"], "--ly"),
    (["collide", "cycle", "--n", "5", "--lx", "0", "--ly", "0"], "--lx"),
    (["collide", "cycle", "--n", "5", "--start", "1,2"], "--start"),
    (["mc", "cycle", "--n", "5", "--samples", "0"], "--samples"),
    (["mc", "cycle", "--n", "5", "--seed", "-2"], "--seed"),
    (["verify", "thm1", "--n-list", "3,4"], "--n-list"),
    (["verify", "structural", "--thetas", "0,0.1"], "--thetas"),
    (["verify", "thm1", "--families", "torus:3"], "--families"),
    (["verify", "sharpness", "--eps", "1.5"], "--eps"),
    (["analyze", "nosuchthing"], "chain"),
    (["gen", "--family", "cycle", "--n", "5"], "-o"),
    (["collide", "cycle", "--n", "5", "--d", "2"], "--d"),
])
def test_usage_errors_name_the_flag(argv, flag):
    with pytest.raises(UsageError, match=flag):
        parse_args(argv)


def test_main_exit_codes(capsys):
    assert main([]) == 2
    assert main(["collide", "cycle", "--n", "1"]) == 2
    assert "--n" in capsys.readouterr().err


def test_config_roundtrip():
    cfg = parse_args(["collide", "hypercube", "--d", "3", "--eps", "0.2", "--lz", "2", "--start", "0,1,2",
                      "--method", "both", "--samples", "100"])
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    with pytest.raises(UsageError):
        RunConfig.from_dict({"command": "gen", "bogus": 1})


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "rwcollide", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout

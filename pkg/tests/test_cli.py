import csv
import hashlib
import json

import pytest

from qfi_lab.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_figure_writes_csv_and_manifest(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"t_max": 100.0}}))
    assert run("figure", "fig3", "--config", cfg, "--out", tmp_path / "o") == 0
    manifest = json.loads((tmp_path / "o" / "fig3_manifest.json").read_text())
    names = [o["file"] for o in manifest["outputs"]]
    assert names == ["fig3_top.csv", "fig3_bottom.csv"]
    for o in manifest["outputs"]:
        data = (tmp_path / "o" / o["file"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == o["sha256"]
    rows = read_csv(tmp_path / "o" / "fig3_top.csv")
    assert rows[0] == ["t", "series", "p"]
    assert manifest["config"]["params"]["t_max"] == 100.0


def test_figure_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run("figure", "fig4", "--steps", "50", "--out", tmp_path / d) == 0
    for name in ("fig4_top.csv", "fig4_bottom.csv", "fig4_manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"params": {')
    assert run("figure", "fig3", "--config", bad, "--out", tmp_path) == 2
    assert "line 1" in capsys.readouterr().err
    assert run("figure", "fig3", "--config", tmp_path / "missing.json", "--out", tmp_path) == 2
    unknown = tmp_path / "u.json"
    unknown.write_text(json.dumps({"params": {"nope": 1}}))
    assert run("figure", "fig3", "--config", unknown, "--out", tmp_path) == 2
    other = tmp_path / "s.json"
    other.write_text(json.dumps({"scenario": "fig4"}))
    assert run("figure", "fig3", "--config", other, "--out", tmp_path) == 2


def test_usage_errors(tmp_path, monkeypatch):
    with pytest.raises(SystemExit) as exc:
        run("figure", "fig9")
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        run("bogus")
    assert exc.value.code == 3
    assert run("figure", "fig3", "--steps", "10", "--out", tmp_path) == 3
    assert run("sweep", "--metric", "h2_total_fi", "--out", tmp_path,
               "--axis", "tau=0.5:1:3", "--axis", "delta=1:2:3", "--axis", "T=1:2:2") == 3
    assert run("sweep", "--metric", "h2_total_fi", "--axis", "tau=0.5:1:0", "--out", tmp_path) == 3
    assert run("sweep", "--metric", "h2_total_fi", "--axis", "speed=0.5:1", "--out", tmp_path) == 3
    assert run("sweep", "--metric", "h2_total_fi", "--out", tmp_path) == 3
    monkeypatch.setenv("QFI_LAB_THREADS", "many")
    assert run("figure", "fig4", "--out", tmp_path) == 3


def test_sweep_1d_and_2d(tmp_path):
    assert run("sweep", "--metric", "no_control_total_fi", "--axis", "tau=0.5:1.5:5", "--threads", "2",
               "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "sweep_no_control_total_fi.csv")
    assert rows[0] == ["tau", "no_control_total_fi"]
    assert len(rows) == 6
    assert run("sweep", "--metric", "h2_total_fi", "--axis", "tau=0.5:1.5:3", "--axis", "delta=0.5:2:4",
               "--out", tmp_path) == 0
    assert len(read_csv(tmp_path / "sweep_h2_total_fi.csv")) == 13


def test_sweep_thread_count_does_not_change_output(tmp_path):
    args = ["sweep", "--metric", "h2_total_fi", "--axis", "tau=0.5:1.5:7"]
    assert run(*args, "--threads", "1", "--out", tmp_path / "a") == 0
    assert run(*args, "--threads", "3", "--out", tmp_path / "b") == 0
    name = "sweep_h2_total_fi.csv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({
        "hamiltonian": {"kind": "H1", "amplitude": 1.0, "frequency": 1e-3},
        "control": {"label": "Method2", "k": 0},
        "t_max": 15.707963267948966, "n_samples": 10,
    }))
    assert run("simulate", "--config", cfg, "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "simulate.csv")
    assert rows[0][0] == "t" and rows[0][-1] == "p"
    assert len(rows) == 11
    assert all(0 <= float(r[-1]) <= 1 for r in rows[1:])
    cfg.write_text(json.dumps({"control": {"label": "XY8"}}))
    assert run("simulate", "--config", cfg, "--out", tmp_path) == 2


def test_claims_command(tmp_path, capsys):
    assert run("claims", "--out", tmp_path) == 0
    report = json.loads((tmp_path / "claims.json").read_text())
    assert report["all_passed"]
    out = capsys.readouterr().out
    assert out.count("PASS") == len(report["claims"])

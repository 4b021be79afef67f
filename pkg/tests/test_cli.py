import json

import numpy as np
import pytest

from vhardy.cli import main
from vhardy.families import wave_packet
from vhardy.grid import Box, GridFunction, const_lp_norm
from vhardy.io import read_any, write_csv, write_grid


@pytest.fixture
def files(tmp_path):
    b = Box.interval(-16, 16, 1024)
    f = wave_packet(b, 0.0, 2.2, 3.0)
    write_grid(tmp_path / "f.bin", f)
    write_csv(tmp_path / "f.csv", f)
    return tmp_path, f


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    return rc, capsys.readouterr()


def test_norm_const2_is_l2(files, capsys):
    d, f = files
    rc, out = run(capsys, "norm", "--p", "const:2", d / "f.bin")
    assert rc == 0
    assert json.loads(out.out)["value"] == pytest.approx(const_lp_norm(f, 2), rel=1e-8)
    rc, out2 = run(capsys, "norm", "--p", "const:2", d / "f.csv")
    assert json.loads(out2.out) == json.loads(out.out)


def test_decompose_reconstruct_pipeline(files, capsys):
    d, f = files
    rc, out = run(capsys, "decompose", "--p", "example-1", d / "f.bin", "--out", d / "d.json")
    assert rc == 0 and json.loads(out.out)["residual"] < 0.02
    rc, out = run(capsys, "reconstruct", d / "d.json", "--out", d / "f2.bin", "--reference", d / "f.bin")
    assert rc == 0 and json.loads(out.out)["relative_residual"] < 0.02
    f2 = read_any(d / "f2.bin")
    assert const_lp_norm(f2 - f, 2) < 0.02 * const_lp_norm(f, 2)


def test_other_verbs(files, capsys):
    d, _ = files
    for argv in (["modular", "--p", "example-1"], ["hardy-norm"], ["bmo-norm", "--depth", "5"],
                 ["carleson", "--depth", "5"], ["frac-apply", "--gamma", "0.1"]):
        rc, out = run(capsys, argv[0], d / "f.bin", *argv[1:])
        assert rc == 0 and "value" in out.out or "l2_norm" in out.out


def test_unknown_verb_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_malformed_file_is_usage_error(tmp_path, capsys):
    (tmp_path / "bad.bin").write_text("garbage\n")
    rc, out = run(capsys, "norm", tmp_path / "bad.bin")
    assert rc == 2 and "usage error" in out.err


def test_run_suite_empty(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("suites: []\n")
    rc, _ = run(capsys, "run-suite", "--config", cfg, "--output-dir", tmp_path / "out")
    assert rc == 0
    assert (tmp_path / "out" / "summary.csv").read_text().strip() == "suite,check,passed,suite_seconds"


def test_run_suite_bad_kernel_spec(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("semigroup: {kind: custom, m: 2.0, g: '(1+r)**(-(n+0.5))', epsilon: 0.6}\n"
                   "suites: [semigroup]\n")
    rc, out = run(capsys, "run-suite", "--config", cfg, "--output-dir", tmp_path / "out")
    assert rc != 0 and "semigroup.configured_spec" in out.err
    rep = json.loads((tmp_path / "out" / "semigroup.json").read_text())
    bad = [c for c in rep["checks"] if not c["passed"]]
    assert [c["id"] for c in bad] == ["semigroup.configured_spec"]
    assert bad[0]["witness"] is not None


def test_env_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("VHARDY_OUTPUT", str(tmp_path / "envout"))
    cfg = tmp_path / "c.yaml"
    cfg.write_text("suites: [semigroup]\n")
    rc, _ = run(capsys, "--threads", "1", "run-suite", "--config", cfg)
    assert rc == 0 and (tmp_path / "envout" / "semigroup.json").exists()


def test_tail_error_exit(tmp_path, capsys):
    b = Box.interval(-16, 16, 512)
    write_grid(tmp_path / "bump.bin", GridFunction(b, np.exp(-b.mesh()[0] ** 2)))
    rc, out = run(capsys, "frac-apply", tmp_path / "bump.bin", "--gamma", "0.2")
    assert rc == 1 and "error" in out.err

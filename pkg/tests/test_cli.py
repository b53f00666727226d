import json
import os
import signal
import subprocess
import sys
import time
from importlib import resources

import jsonschema
import pytest

from floquet_lockin import cli
from floquet_lockin.config import WORKERS_ENV, parse_config
from floquet_lockin.jobs import run_job
from floquet_lockin.output import sha256_file


def write(tmp_path, text, name="job.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def manifest_schema():
    return json.loads(resources.files("floquet_lockin").joinpath("schemas/manifest.schema.json").read_text())


def result_schema():
    return json.loads(resources.files("floquet_lockin").joinpath("schemas/result.schema.json").read_text())


PENDULUM_MAP = """
[job]
kind = pendulum-map
[axes]
x_min = 0.3
x_max = 1.5
x_count = 3
y_min = 0
y_max = 0.8
y_count = 3
"""


def test_pendulum_map_job(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["pendulum-map", "--config", write(tmp_path, PENDULUM_MAP), "--out", str(out)])
    assert rc == 0
    lines = (out / "pendulum-map.csv").read_text().splitlines()
    assert len(lines) == 10
    assert lines[0] == "x,y,max_re,max_im_fraction,stable,classification"
    manifest = json.loads((out / "manifest.json").read_text())
    jsonschema.validate(manifest, manifest_schema())
    assert set(manifest["outputs"]) == {"pendulum-map.csv", "pendulum-map.svg"}
    for name, digest in manifest["outputs"].items():
        assert sha256_file(out / name) == digest
    assert manifest["cells"]["total"] == 9 and manifest["cells"]["nan"] == 0
    assert manifest["settings"]["grid"] == [3, 3]
    summary = json.loads(capsys.readouterr().out)
    assert summary["cells_ok"] == 9


def test_winkler_critical_job(tmp_path):
    text = "[job]\nkind = winkler-critical\nK_bar = 0.4\nlambda_bar = 0.57\n"
    out = tmp_path / "o"
    assert cli.main(["winkler-critical", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    doc = json.loads((out / "winkler-critical.json").read_text())
    jsonschema.validate(doc, result_schema())
    assert doc["P_cr_ratio"] == pytest.approx(0.90, abs=0.01)
    assert doc["classification"] == "period-doubled"


def test_pendulum_point_job(tmp_path):
    text = "[job]\nkind = pendulum-point\nA_bar = 0.2\nT_over_2pi = 0.5\n"
    out = tmp_path / "o"
    assert cli.main(["pendulum-point", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    doc = json.loads((out / "pendulum-point.json").read_text())
    jsonschema.validate(doc, result_schema())
    assert doc["stable"] is False and doc["max_im_fraction"] == pytest.approx(0.5)


def test_reconstruct_job(tmp_path):
    text = "[job]\nkind = reconstruct\nK_bar = 0.4\nlambda_bar = 0.57\nperiods = 4\nsamples_per_period = 16\n"
    out = tmp_path / "o"
    assert cli.main(["reconstruct", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    rows = (out / "reconstruct.csv").read_text().splitlines()
    assert rows[0] == "xi,real,imag"
    assert len(rows) == 1 + 4 * 16 + 1
    doc = json.loads((out / "reconstruct.json").read_text())
    jsonschema.validate(doc, result_schema())
    assert doc["mode"]["samples"] == 65


def test_oracle_compare_job(tmp_path):
    text = "[job]\nkind = oracle-compare\npoints = 0.4:0.57\n[fd]\nperiods = 20\nnodes_per_period = 100\n"
    out = tmp_path / "o"
    assert cli.main(["oracle-compare", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    doc = json.loads((out / "oracle-compare.json").read_text())
    jsonschema.validate(doc, result_schema())
    assert len(doc["points"]) == 1 and doc["failed"] == []
    assert doc["max_relative_discrepancy"] <= 0.01
    assert doc["max_spectrum_distance_bins"] <= 1.0


def test_winkler_map_records_failed_cells(tmp_path):
    text = "[job]\nkind = winkler-map\n[axes]\nx_min = 0.5\nx_max = 1\nx_count = 2\ny_count = 1\n[hill]\nP_hi = 40\ncoarse_steps = 4\n"
    out = tmp_path / "o"
    assert cli.main(["winkler-map", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["cells"]["failed"] == 2 and manifest["cells"]["nan"] == 2
    assert manifest["cells"]["nan_rendered"] == 2
    assert "SearchError" in manifest["cells"]["errors"][0]["message"]
    assert "nan" in (out / "winkler-map.csv").read_text()


def test_usage_errors_exit_1(tmp_path, capsys):
    assert cli.main([]) == 1
    assert cli.main(["nonsense", "--config", "x"]) == 1
    assert cli.main(["winkler-critical"]) == 1
    assert cli.main(["winkler-critical", "--config", "x", "--workers", "two"]) == 1


def test_config_errors_exit_1(tmp_path, capsys):
    bad = write(tmp_path, "[job]\nkind = winkler-critical\nK_bar = 1.2\nlambda_bar = 1\n")
    assert cli.main(["winkler-critical", "--config", bad]) == 1
    assert "K_bar < 1" in capsys.readouterr().err
    ok = write(tmp_path, "[job]\nkind = winkler-critical\nK_bar = 0.2\nlambda_bar = 1\n", "ok.ini")
    assert cli.main(["pendulum-map", "--config", ok]) == 1
    assert cli.main(["winkler-critical", "--config", ok, "--workers", "0"]) == 1
    assert cli.main(["winkler-critical", "--config", ok, "--hill-M", "0"]) == 1


def test_numeric_failure_exits_2(tmp_path, capsys):
    text = "[job]\nkind = winkler-critical\nK_bar = 0.2\nlambda_bar = 1\n[hill]\nP_hi = 10\ncoarse_steps = 4\n"
    out = tmp_path / "o"
    assert cli.main(["winkler-critical", "--config", write(tmp_path, text), "--out", str(out)]) == 2
    assert "no critical load" in capsys.readouterr().err
    assert not (out / "manifest.json").exists()


def test_io_failure_exits_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    text = "[job]\nkind = pendulum-point\nA_bar = 0.2\nOmega_bar = 2\n"
    assert cli.main(["pendulum-point", "--config", write(tmp_path, text), "--out", str(blocker / "sub")]) == 3
    assert cli.main(["pendulum-point", "--config", str(tmp_path / "missing.ini")]) == 3


def test_flags_override_config_and_env(tmp_path, monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "2")
    text = "[job]\nkind = pendulum-point\nA_bar = 0.2\nOmega_bar = 2\n[hill]\nM = 8\n"
    out = tmp_path / "o"
    assert cli.main(["pendulum-point", "--config", write(tmp_path, text), "--out", str(out), "--hill-M", "6"]) == 0
    settings = json.loads((out / "manifest.json").read_text())["settings"]
    assert settings["workers"] == 2 and settings["M"] == 6
    assert cli.main(["pendulum-point", "--config", write(tmp_path, text), "--out", str(out), "--workers", "1"]) == 0
    assert json.loads((out / "manifest.json").read_text())["settings"]["workers"] == 1


def test_manifest_absent_when_run_fails_midway(tmp_path, monkeypatch):
    import floquet_lockin.jobs as jobs

    def broken(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(jobs, "render_heatmap_svg", broken)
    cfg = parse_config(PENDULUM_MAP + f"[output]\ndir = {tmp_path / 'o'}\n")
    with pytest.raises(OSError):
        run_job(cfg)
    names = sorted(p.name for p in (tmp_path / "o").iterdir())
    assert "manifest.json" not in names
    assert not any(n.endswith(".tmp") for n in names)


def test_outputs_identical_for_one_and_many_workers(tmp_path):
    digests = []
    for w in (1, 3):
        out = tmp_path / f"w{w}"
        cfg = parse_config(PENDULUM_MAP + f"[output]\ndir = {out}\n").with_overrides(workers=w)
        m = run_job(cfg)
        digests.append(m.outputs)
    assert digests[0] == digests[1]


def test_killed_run_leaves_no_final_files(tmp_path):
    text = "[job]\nkind = winkler-map\n[axes]\nx_min = 0.3\nx_max = 1.7\nx_count = 40\ny_min = 0\ny_max = 0.5\ny_count = 10\n"
    cfg = write(tmp_path, text)
    out = tmp_path / "o"
    proc = subprocess.Popen(
        [sys.executable, "-m", "floquet_lockin", "winkler-map", "--config", cfg, "--out", str(out)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    time.sleep(2.0)
    assert proc.poll() is None, "run finished before it could be interrupted"
    proc.send_signal(signal.SIGKILL)
    proc.wait()
    names = sorted(p.name for p in out.iterdir()) if out.exists() else []
    assert all(n.startswith(".") and n.endswith(".tmp") for n in names), names


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "floquet_lockin", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "0.1.0" in r.stdout

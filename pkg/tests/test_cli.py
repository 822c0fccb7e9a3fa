import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from qtmt_ssimv import cli
from qtmt_ssimv.experiment import Evaluation
from qtmt_ssimv.media_io import Plane, write_pgm, write_raw_yuv, write_y4m
from qtmt_ssimv.reporting import validate_report

from conftest import random_plane


@pytest.fixture(scope="module")
def image(tmp_path_factory):
    path = tmp_path_factory.mktemp("in") / "img.pgm"
    write_pgm(random_plane(np.random.default_rng(3), 64, 64, 8, smooth=True), path)
    return path


def test_search_writes_report_csv_and_overlays(image, tmp_path, capsys):
    out = tmp_path / "run"
    rc = cli.main(["search", str(image), "--out", str(out), "--repeats", "1", "--qp", "22,27,32,37"])
    assert rc == 0
    doc = json.loads((out / "report.json").read_text())
    validate_report(doc)
    assert doc["config"]["qps"] == [22, 27, 32, 37] and doc["config"]["policy"] == "fds-ssimv"
    assert (out / "ctus.csv").exists()
    for qp in (22, 27, 32, 37):
        for arm in ("anchor", "test"):
            assert (out / f"img_qp{qp}_{arm}.ppm").read_bytes().startswith(b"P6\n64 64\n255\n")
    assert "TS" in capsys.readouterr().out


def test_self_comparison(image, tmp_path):
    out = tmp_path / "self"
    assert cli.main(["search", str(image), "--out", str(out), "--policy", "full", "--repeats", "3"]) == 0
    s = json.loads((out / "report.json").read_text())["summary"]
    assert s["bd_rate"] == 0.0 and s["accuracy"] == 1.0 and s["oh_percent"] == 0.0
    # both arms run the same work; only scheduler noise separates them
    assert s["ts_percent"] < 25


def test_y4m_and_raw_inputs(tmp_path):
    rng = np.random.default_rng(0)
    planes = [random_plane(rng, 32, 32, 10) for _ in range(2)]
    write_y4m(planes, tmp_path / "v.y4m")
    write_raw_yuv(planes, tmp_path / "v.yuv")
    rc = cli.main(["search", str(tmp_path / "v.y4m"), "--out", str(tmp_path / "a"), "--qp", "32",
                   "--repeats", "1", "--ctu-size", "32", "--frames", "1"])
    assert rc == 0
    doc = json.loads((tmp_path / "a" / "report.json").read_text())
    assert doc["inputs"][0]["frames"] == 1 and doc["inputs"][0]["bit_depth"] == 10
    assert doc["inputs"][0]["bd_rate"] is None
    rc = cli.main(["search", str(tmp_path / "v.yuv"), "--width", "32", "--height", "32", "--bit-depth", "10",
                   "--out", str(tmp_path / "b"), "--qp", "32", "--repeats", "1", "--ctu-size", "32"])
    assert rc == 0
    assert json.loads((tmp_path / "b" / "report.json").read_text())["inputs"][0]["frames"] == 2


def test_analyze_command(tmp_path, capsys):
    rng = np.random.default_rng(1)
    arr = np.full((64, 64), 120)
    arr[0:8] = rng.integers(0, 256, (8, 64))
    arr[32:40] = rng.integers(0, 256, (8, 64))
    write_pgm(Plane(arr), tmp_path / "n.pgm")
    assert cli.main(["analyze", str(tmp_path / "n.pgm"), "--out", str(tmp_path / "o")]) == 0
    with open(tmp_path / "o" / "analysis.csv") as f:
        rows = {r["region"]: r for r in csv.DictReader(f)}
    assert len(rows) == 14
    assert float(rows["TTH1"]["mean"]) < float(rows["TTH2"]["mean"])
    assert "TTH1" in capsys.readouterr().out


def test_report_command(image, tmp_path, capsys):
    out = tmp_path / "r"
    cli.main(["search", str(image), "--out", str(out), "--repeats", "1"])
    merged = tmp_path / "summary.csv"
    assert cli.main(["report", str(out / "report.json"), "--out", str(merged)]) == 0
    with open(merged) as f:
        rows = list(csv.DictReader(f))
    assert [r["input"] for r in rows] == ["img", "AVERAGE"]
    assert rows[0]["ts_percent"] == rows[1]["ts_percent"]


def test_report_schema_error_exit_code(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"schema_version": 1, "config": {}, "inputs": []}))
    assert cli.main(["report", str(tmp_path / "bad.json")]) == 2
    assert "summary" in capsys.readouterr().err


def test_input_error_exit_codes(tmp_path):
    assert cli.main(["search", str(tmp_path / "missing.pgm"), "--out", str(tmp_path)]) == 2
    (tmp_path / "x.yuv").write_bytes(bytes(10))
    assert cli.main(["analyze", str(tmp_path / "x.yuv"), "--width", "4", "--height", "4",
                     "--out", str(tmp_path)]) == 2
    (tmp_path / "x.bmp").write_bytes(bytes(10))
    assert cli.main(["analyze", str(tmp_path / "x.bmp"), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("argv", [
    ["search", "IMG", "--qp", "60"],
    ["search", "IMG", "--qp", ""],
    ["search", "IMG", "--policy", "greedy"],
    ["search", "IMG", "--ctu-size", "48"],
    ["search", "IMG", "--threads", "0"],
    ["search", "IMG", "--ssim-variant", "fancy"],
])
def test_config_error_exit_codes(image, argv, capsys):
    argv = [str(image) if a == "IMG" else a for a in argv]
    with pytest.raises(SystemExit) as exc:
        rc = cli.main(argv)
        raise SystemExit(rc)
    assert exc.value.code == 3


def test_invariant_violation_exit_code(image, tmp_path, monkeypatch):
    real = cli.evaluate

    def broken(*args, **kwargs):
        ev: Evaluation = real(*args, **kwargs)
        ev.containment_violations.append("CTU 0: injected")
        return ev

    monkeypatch.setattr(cli, "evaluate", broken)
    rc = cli.main(["search", str(image), "--out", str(tmp_path), "--repeats", "1", "--qp", "32"])
    assert rc == 4


def test_module_entry_point(image, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qtmt_ssimv", "report", str(tmp_path / "none.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "qtmt_ssimv", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "analyze" in proc.stdout

import json
import os
import re
import subprocess
import xml.etree.ElementTree as ET

import pytest

BIN = os.environ.get("PULLIN_LAB_BIN", "pullin_lab")


def run(*args, cwd=None):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def write_config(path, doc):
    path.write_text(json.dumps(doc))
    return path


def read_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "voltage_v,tip_disp_m,inner_iters,converged,capacitance_f"
    return [line.split(",") for line in lines[1:]]


LUMPED = {
    "lumped": {"stiffness_n_per_m": 1.0, "gap_m": 1e-6, "area_m2": 1e-10},
    "solver": {"v_end_v": 30, "dv_v": 0.5, "pullin_bisection_tol_v": 0.001},
}


def test_catalog_lists_twelve_specimens():
    r = run("catalog")
    assert r.returncode == 0
    rows = [line.split() for line in r.stdout.splitlines()[1:] if line.strip()]
    assert len(rows) == 12
    assert rows[3][:2] == ["4", "InPlane"]
    assert [float(x) for x in rows[3][2:6]] == [205.0, 15.0, 1.9, 10.0]
    assert float(rows[8][2]) == 533.0


def test_zero_voltage_sweep_gives_the_curvature_offset(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"specimen": {"catalog_id": "10"},
                                             "solver": {"v_end_v": 0, "dv_v": 1}})
    r = run("sweep", cfg, "--csv", tmp_path / "out.csv")
    assert r.returncode == 0, r.stderr
    rows = read_rows(tmp_path / "out.csv")
    assert len(rows) == 1
    assert float(rows[0][0]) == 0.0
    assert float(rows[0][1]) == pytest.approx(-3.95e-6, rel=0.01)
    assert rows[0][3] == "1"


def test_sweep_is_monotone_and_deterministic(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"specimen": {"catalog_id": "4"},
                                             "solver": {"v_end_v": 200, "dv_v": 5}})
    outputs = []
    for name in ("a.csv", "b.csv"):
        r = run("sweep", cfg, "--csv", tmp_path / name)
        assert r.returncode == 0, r.stderr
        outputs.append((tmp_path / name).read_bytes())
    assert outputs[0] == outputs[1]
    assert b"\r" not in outputs[0]
    rows = read_rows(tmp_path / "a.csv")
    converged = [r for r in rows if r[3] == "1"]
    tips = [float(r[1]) for r in converged]
    assert tips == sorted(tips)
    assert rows[-1][3] == "0"
    assert all(r[4] == "" for r in rows)


def test_malformed_config_exits_one_without_outputs(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"specimen": {"catalog_id": "4", "gap_m": -1e-6}}')
    csv = tmp_path / "out.csv"
    r = run("sweep", cfg, "--csv", csv, "--svg", tmp_path / "out.svg")
    assert r.returncode == 1
    assert "gap" in r.stderr
    assert not csv.exists()
    assert not (tmp_path / "out.svg").exists()


def test_lumped_pullin_bracket(tmp_path):
    cfg = write_config(tmp_path / "l.json", LUMPED)
    r = run("pullin", cfg)
    assert r.returncode == 0, r.stderr
    m = re.search(r"PULLIN_V_LOW=(\S+) PULLIN_V_HIGH=(\S+)", r.stdout)
    assert m
    low, high = float(m.group(1)), float(m.group(2))
    assert low < 18.2932 < high
    assert high - low <= 0.001 + 1e-12


def test_no_pullin_exits_three(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"specimen": {"catalog_id": "4"},
                                             "solver": {"v_end_v": 0.1, "dv_v": 0.05}})
    r = run("pullin", cfg)
    assert r.returncode == 3
    assert "v_end" in r.stdout + r.stderr


def calibrate(tmp_path, specimen, method="BEM"):
    cfg = write_config(tmp_path / "cal.json", {"specimen": specimen})
    r = run("calibrate", cfg, "--method", method)
    assert r.returncode == 0, r.stderr
    values = dict(line.split("=") for line in r.stdout.split())
    return {k: float(v) for k, v in values.items()}


def test_calibration_of_degenerate_strips_is_one(tmp_path):
    strip = {"catalog_id": "4", "gap_m": 1e-6, "width_m": 100e-6, "thickness_m": 0.1e-6,
             "length_m": 100e-6, "counter_electrode_extent_m": 100e-6}
    assert calibrate(tmp_path, strip)["correction"] == pytest.approx(1.0, abs=0.02)


def test_calibration_trends(tmp_path):
    assert calibrate(tmp_path, {"catalog_id": "10"})["correction"] > 1.0
    with_wafer = calibrate(tmp_path, {"catalog_id": "4", "wafer_surface": True})
    without = calibrate(tmp_path, {"catalog_id": "4", "wafer_surface": False})
    assert with_wafer["correction"] < without["correction"]


def test_svg_and_manifest(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"specimen": {"catalog_id": "10"},
                                             "solver": {"v_end_v": 60, "dv_v": 2}})
    svg = tmp_path / "plot.svg"
    manifest = tmp_path / "run.json"
    r = run("sweep", cfg, "--csv", tmp_path / "out.csv", "--svg", svg, "--overlay-linear",
            "--manifest", manifest)
    assert r.returncode == 0, r.stderr
    root = ET.parse(svg).getroot()
    assert root.tag == "{http://www.w3.org/2000/svg}svg"
    assert "href" not in svg.read_text()
    assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) == 2
    doc = json.loads(manifest.read_text())
    assert doc["command"] == "sweep"
    assert doc["wall_time_s"] >= 0
    assert doc["outputs"]
    for path in doc["outputs"]:
        assert os.path.exists(path)


def test_unknown_command_is_a_usage_error():
    assert run("explode").returncode != 0

import json

import numpy as np
import pytest

from gcflow import cli
from gcflow import support_body as sb
from gcflow.sphere_domain import make_grid


def _write_config(path, **overrides):
    base = {
        "dim": 1,
        "alpha": 1.0,
        "resolution": 64,
        "body": "sphere",
        "radius": 1.0,
        "mode": "physical",
        "sample_interval": 200,
    }
    base.update(overrides)
    path.write_text("".join(f"{k} = {v}\n" for k, v in base.items()))
    return str(path)


def test_run_physical_summary_and_trajectory(tmp_path):
    out = tmp_path / "out"
    cfg = _write_config(tmp_path / "cfg.txt", output_dir=out)
    assert cli.main(["run", cfg]) == 0
    summary = json.loads((out / "summary.json").read_text())
    t_star = summary["physical"]["T_star_estimate"]
    assert abs(t_star - 0.5) < 5e-3
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0].split(",") == cli.TRAJECTORY_COLUMNS
    assert len(lines) > 3
    first = dict(zip(cli.TRAJECTORY_COLUMNS, lines[1].split(",")))
    assert float(first["V"]) == pytest.approx(np.pi, abs=1e-10)
    assert float(first["Kmin"]) == pytest.approx(1.0, abs=1e-10)
    assert (out / "snapshot_physical_000000.json").exists()


def test_run_rescaled_diagnostics(tmp_path):
    out = tmp_path / "out"
    cfg = _write_config(
        tmp_path / "cfg.txt", body="perturbed_sphere", modes="2:0.05",
        mode="rescaled", tau_end=0.5, output_dir=out, resolution=128,
    )
    assert cli.main(["run", cfg]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["rescaled"]["monotone"] is True
    assert summary["rescaled"]["bound_flags_all_pass"] is True
    header = (out / "diagnostics.csv").read_text().splitlines()[0].split(",")
    for col in cli.DIAG_COLUMNS + ["trace_bound", "support_envelope"]:
        assert col in header


def test_run_malformed_config_exit_3(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("dim = 1\nalpha = -2\nresolution = 64\nbody = sphere\n")
    assert cli.main(["run", str(bad)]) == 3
    bad.write_text("no equals sign here\n")
    assert cli.main(["run", str(bad)]) == 3
    assert cli.main(["run", str(tmp_path / "missing.txt")]) == 3


def test_run_budget_exhaustion_exit_2(tmp_path):
    cfg = _write_config(
        tmp_path / "cfg.txt", max_steps=5, output_dir=tmp_path / "out"
    )
    assert cli.main(["run", cfg]) == 2


def test_export_polyline(tmp_path):
    g = make_grid(1, 64)
    snap = tmp_path / "snap.json"
    sb.save_snapshot(snap, sb.sphere(g, 1.0))
    out = tmp_path / "circle.csv"
    assert cli.main(["export", str(snap), "polyline-csv", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y"
    assert len(lines) == 65
    pts = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1]) - 1.0)) < 1e-12


def test_export_obj_watertight_and_extent(tmp_path):
    g = make_grid(2, (32, 64))
    snap = tmp_path / "snap.json"
    sb.save_snapshot(snap, sb.ellipsoid(g, (2.0, 1.0, 1.0)))
    out = tmp_path / "body.obj"
    assert cli.main(["export", str(snap), "obj", str(out)]) == 0
    verts, faces, edges = [], 0, set()
    for line in out.read_text().splitlines():
        if line.startswith("v "):
            verts.append([float(v) for v in line.split()[1:]])
        elif line.startswith("f "):
            faces += 1
            ids = [int(v) for v in line.split()[1:]]
            for a, b in zip(ids, ids[1:] + ids[:1]):
                edges.add(frozenset((a, b)))
    euler = len(verts) - len(edges) + faces
    assert euler == 2
    verts = np.array(verts)
    assert abs(np.max(np.abs(verts[:, 0])) - 2.0) < 1e-3
    assert abs(np.max(np.abs(verts[:, 1])) - 1.0) < 2e-3


def test_export_dimension_mismatch_exit_3(tmp_path):
    snap1 = tmp_path / "s1.json"
    sb.save_snapshot(snap1, sb.sphere(make_grid(1, 64), 1.0))
    assert cli.main(["export", str(snap1), "obj", str(tmp_path / "x.obj")]) == 3
    snap2 = tmp_path / "s2.json"
    sb.save_snapshot(snap2, sb.sphere(make_grid(2, (16, 32)), 1.0))
    assert cli.main(["export", str(snap2), "polyline-csv",
                     str(tmp_path / "x.csv")]) == 3


def test_repeat_runs_byte_identical(tmp_path):
    artifacts = []
    for name in ("a", "b"):
        out = tmp_path / name
        cfg = _write_config(
            tmp_path / f"{name}.txt", body="random_perturbed", seed=7,
            mode="both", tau_end=0.3, output_dir=out, resolution=128,
        )
        assert cli.main(["run", cfg]) == 0
        artifacts.append(
            ((out / "trajectory.csv").read_bytes(),
             (out / "diagnostics.csv").read_bytes())
        )
    assert artifacts[0][0] == artifacts[1][0]
    assert artifacts[0][1] == artifacts[1][1]


def test_verify_unknown_suite_exit_3(capsys):
    assert cli.main(["verify", "no-such-suite"]) == 3


def test_verify_quadrature_suite(capsys):
    assert cli.main(["verify", "quadrature-convergence"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out

"""Command-line driver.

Subcommands:
  run     <config>                  -- physical and/or rescaled run + artifacts
  export  <snapshot> <fmt> <out>    -- polyline-csv (dim 1) or obj (dim 2)
  verify  <suite>                   -- run a registered verification suite

Config files are flat ``key = value`` text; see the README for the key
list.  Exit codes: 0 clean stop, 2 step failure / budget exhausted,
3 config or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import diagnostics as dg
from . import flow_engine as fe
from . import support_body as sb
from .errors import ConfigError, FormatMismatch, GCFlowError, StepFailure, Timeout
from .sphere_domain import make_grid

TRAJECTORY_COLUMNS = [
    "step", "t", "tau", "V", "A", "Kmin", "Kmax", "Hmax",
    "Smin", "Smax", "wmin", "wmax", "dt",
]
DIAG_COLUMNS = [
    "tau", "Itilde", "dItilde_dtau", "pinching", "residual", "C_best",
    "wmin", "wmax", "eta", "Kmin", "Kmax", "hessSup",
]
FLAG_COLUMNS = [
    "speed_bound_inner", "speed_bound_width", "trace_bound",
    "support_envelope", "normalizer_envelope", "gauss_envelope",
]

DEFAULTS = {
    "mode": "physical",
    "dt_safety": 0.5,
    "v_min": None,  # engine default 1e-4 V0
    "t_max": None,
    "tau_end": 3.0,
    "max_steps": 2_000_000,
    "sample_interval": 100,
    "output_dir": "out",
    "seed": 0,
    "radius": 1.0,
    "perturb_count": 2,
    "perturb_max_amp": 0.05,
}


def parse_config(path: str) -> dict:
    cfg = dict(DEFAULTS)
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for ln, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        cfg[key] = value
    return _validate(cfg)


def _validate(cfg: dict) -> dict:
    out = dict(cfg)
    try:
        out["dim"] = int(cfg["dim"])
        out["alpha"] = float(cfg["alpha"])
        res = str(cfg["resolution"])
        if out["dim"] == 1:
            out["resolution"] = int(res)
        else:
            nt, nf = res.lower().split("x")
            out["resolution"] = (int(nt), int(nf))
        out["mode"] = str(cfg["mode"])
        out["dt_safety"] = float(cfg["dt_safety"])
        out["tau_end"] = float(cfg["tau_end"])
        out["max_steps"] = int(cfg["max_steps"])
        out["sample_interval"] = int(cfg["sample_interval"])
        out["seed"] = int(cfg["seed"])
        out["radius"] = float(cfg["radius"])
        out["perturb_count"] = int(cfg["perturb_count"])
        out["perturb_max_amp"] = float(cfg["perturb_max_amp"])
        for key in ("v_min", "t_max"):
            if cfg.get(key) is not None:
                out[key] = float(cfg[key])
        out["body"] = str(cfg["body"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    if out["dim"] not in (1, 2):
        raise ConfigError("dim must be 1 or 2")
    if out["alpha"] <= 0.0:
        raise ConfigError("alpha must be positive")
    if not 0.0 < out["dt_safety"] <= 1.0:
        raise ConfigError("dt_safety must lie in (0, 1]")
    if out["mode"] not in ("physical", "rescaled", "both"):
        raise ConfigError(f"unknown mode {out['mode']!r}")
    for key in ("tau_end", "max_steps", "sample_interval", "radius"):
        if out[key] <= 0:
            raise ConfigError(f"{key} must be positive")
    return out


def _parse_modes(text: str):
    # "2:0.05,-3:0.02" -> ((2, 0.05), (-3, 0.02))
    modes = []
    for part in str(text).split(","):
        k, amp = part.split(":")
        modes.append((int(k), float(amp)))
    return tuple(modes)


def build_body(cfg: dict):
    grid = make_grid(cfg["dim"], cfg["resolution"])
    kind = cfg["body"]
    try:
        if kind == "sphere":
            return sb.sphere(grid, cfg["radius"])
        if kind == "ellipsoid":
            radii = tuple(float(x) for x in str(cfg["radii"]).split(","))
            return sb.ellipsoid(grid, radii)
        if kind == "perturbed_sphere":
            return sb.perturbed_sphere(grid, cfg["radius"], _parse_modes(cfg["modes"]))
        if kind == "random_perturbed":
            rng = np.random.default_rng(cfg["seed"])
            ks = rng.choice([2, 3, 4, -2, -3, -4], size=cfg["perturb_count"],
                            replace=False)
            amps = rng.uniform(0.2, 1.0, size=cfg["perturb_count"])
            amps *= cfg["perturb_max_amp"] / amps.sum()
            return sb.perturbed_sphere(
                grid, cfg["radius"], tuple(zip((int(k) for k in ks), amps))
            )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad body spec: {exc}") from exc
    raise ConfigError(f"unknown body kind {kind!r}")


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _trajectory_row(state: fe.FlowState):
    summary = sb.curvature_summary(state.body)
    w_min, w_max = sb.width_extremes(state.body)
    tau = -np.log(state.V / state.V0) if state.V > 0 else float("nan")
    return [
        state.step_count, state.t, float(tau), state.V, sb.area(state.body),
        summary.K_min, summary.K_max, summary.H_max,
        float(np.min(state.body.values)), float(np.max(state.body.values)),
        w_min, w_max, state.dt_last,
    ]


def _run_physical(cfg, body, outdir):
    state = fe.make_flow(body, cfg["alpha"])
    rows = [_trajectory_row(state)]
    snap_idx = [0]
    sb.save_snapshot(os.path.join(outdir, "snapshot_physical_000000.json"),
                     body, alpha=cfg["alpha"], time=0.0)

    def sample(st):
        rows.append(_trajectory_row(st))
        snap_idx[0] += 1
        sb.save_snapshot(
            os.path.join(outdir, f"snapshot_physical_{snap_idx[0]:06d}.json"),
            st.body, alpha=cfg["alpha"], time=st.t,
        )

    run = fe.run_to_extinction(
        state, v_min=cfg["v_min"], t_max=cfg["t_max"], max_steps=cfg["max_steps"],
        safety=cfg["dt_safety"], sample_every=cfg["sample_interval"],
        on_sample=sample,
    )
    rows.append(_trajectory_row(run.final))
    _write_csv(os.path.join(outdir, "trajectory.csv"), TRAJECTORY_COLUMNS, rows)
    return {
        "status": run.status,
        "steps": int(run.final.step_count),
        "t_final": run.final.t,
        "V_final": run.final.V,
        "T_star_estimate": run.t_star,
    }


def _run_rescaled(cfg, body, outdir):
    state = fe.make_rescaled(body, cfg["alpha"])
    monitor = dg.BoundMonitor(cfg["alpha"], cfg["dim"])
    records = []
    snap_idx = [0]

    def sample(st):
        records.append(dg.make_record(st, monitor))
        sb.save_snapshot(
            os.path.join(outdir, f"snapshot_rescaled_{snap_idx[0]:06d}.json"),
            st.body, alpha=cfg["alpha"], time=st.tau,
        )
        snap_idx[0] += 1

    # sample spacing in tau derived from the step-count interval
    probe_dtau = cfg["sample_interval"] * fe.stable_dt(
        state.body, cfg["alpha"], cfg["dt_safety"]
    ) * state.eta
    run = fe.run_rescaled(
        state, cfg["tau_end"], max_steps=cfg["max_steps"],
        safety=cfg["dt_safety"], sample_dtau=probe_dtau, on_sample=sample,
    )
    rows = []
    flag_cols = [c for c in FLAG_COLUMNS if c in records[0].bound_flags]
    for i, rec in enumerate(records):
        slope = (
            (rec.Itilde - records[i - 1].Itilde) / (rec.tau - records[i - 1].tau)
            if i and rec.tau > records[i - 1].tau else 0.0
        )
        rows.append(
            [rec.tau, rec.Itilde, slope, rec.pinching, rec.residual, rec.C_best,
             rec.w_min, rec.w_max, rec.eta, rec.K_min, rec.K_max, rec.hess_sup]
            + [int(rec.bound_flags[c]) for c in flag_cols]
        )
    _write_csv(os.path.join(outdir, "diagnostics.csv"), DIAG_COLUMNS + flag_cols, rows)
    report = dg.monotonicity_report(records) if len(records) > 1 else None
    last = records[-1]
    return {
        "status": run.status,
        "tau_final": run.final.tau,
        "Itilde_final": last.Itilde,
        "pinching_final": last.pinching,
        "residual_final": last.residual,
        "C_best_final": last.C_best,
        "monotone": bool(report.passed) if report else None,
        "max_excursion": report.max_excursion if report else None,
        "bound_flags_all_pass": bool(
            all(all(r.bound_flags.values()) for r in records)
        ),
    }


def cmd_run(config_path: str) -> int:
    cfg = parse_config(config_path)
    body = build_body(cfg)
    outdir = cfg["output_dir"]
    os.makedirs(outdir, exist_ok=True)
    summary = {"config": {k: str(v) for k, v in cfg.items()}}
    code = 0
    try:
        if cfg["mode"] in ("physical", "both"):
            summary["physical"] = _run_physical(cfg, body, outdir)
            if summary["physical"]["status"] != "extinct":
                code = 2
        if cfg["mode"] in ("rescaled", "both"):
            summary["rescaled"] = _run_rescaled(cfg, body, outdir)
            if summary["rescaled"]["status"] != "reached_tau_end":
                code = 2
    except (StepFailure, Timeout) as exc:
        summary["error"] = str(exc)
        code = 2
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return code


def cmd_export(snapshot_path: str, fmt: str, out_path: str) -> int:
    body, _ = sb.load_snapshot(snapshot_path)
    points = sb.embed(body)
    if fmt == "polyline-csv":
        if body.grid.dim != 1:
            raise FormatMismatch("polyline-csv export requires a dim-1 snapshot")
        _write_csv(out_path, ["x", "y"], points.tolist())
        return 0
    if fmt == "obj":
        if body.grid.dim != 2:
            raise FormatMismatch("obj export requires a dim-2 snapshot")
        _write_obj(body, points, out_path)
        return 0
    raise ConfigError(f"unknown export format {fmt!r}")


def _write_obj(body, points, out_path):
    nt, nf = body.grid.shape
    north = points[np.argmax(points[:, 2])]
    south = points[np.argmin(points[:, 2])]
    with open(out_path, "w") as fh:
        for p in points:
            fh.write(f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
        fh.write(f"v {_fmt(north[0])} {_fmt(north[1])} {_fmt(north[2])}\n")
        fh.write(f"v {_fmt(south[0])} {_fmt(south[1])} {_fmt(south[2])}\n")
        idx = lambda j, i: j * nf + (i % nf) + 1  # OBJ is 1-based
        for j in range(nt - 1):
            for i in range(nf):
                fh.write(
                    f"f {idx(j, i)} {idx(j + 1, i)} "
                    f"{idx(j + 1, i + 1)} {idx(j, i + 1)}\n"
                )
        vn, vs = nt * nf + 1, nt * nf + 2
        for i in range(nf):  # fan caps; row 0 is nearest the north pole
            fh.write(f"f {vn} {idx(0, i)} {idx(0, i + 1)}\n")
            fh.write(f"f {vs} {idx(nt - 1, i + 1)} {idx(nt - 1, i)}\n")


def cmd_verify(suite: str) -> int:
    from .verify import SUITES

    if suite not in SUITES:
        raise ConfigError(
            f"unknown suite {suite!r}; available: {', '.join(sorted(SUITES))}"
        )
    results = SUITES[suite]()
    width = max(len(name) for name, _, _ in results)
    ok = True
    for name, passed, detail in results:
        ok &= passed
        print(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}  {detail}")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gcflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a flow from a config file")
    p_run.add_argument("config")
    p_exp = sub.add_parser("export", help="export a snapshot to geometry formats")
    p_exp.add_argument("snapshot")
    p_exp.add_argument("format", choices=["polyline-csv", "obj"])
    p_exp.add_argument("output")
    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("suite")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "export":
            return cmd_export(args.snapshot, args.format, args.output)
        return cmd_verify(args.suite)
    except (ConfigError, FormatMismatch, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (StepFailure, Timeout) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GCFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

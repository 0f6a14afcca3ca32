"""Command-line front end.

    activesense simulate --k 1 --a 0.70710678 --x0 1 --z0 1 --t-end 60
    activesense floquet --delta-min 0 --delta-max 4 --step 0.01
    activesense lyapunov --delta 0.43 --eta auto
    activesense doa --threads 4
    activesense observability --x 0.5 --z 1.0 --gamma quadratic

Every subcommand also accepts ``--config file.json``; keys are the flag
names with dashes replaced by underscores, and explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import csvio, doa, floquet, lyapunov, observability
from .dynamics import (
    SystemParams,
    closed_loop_rhs,
    control_law,
    hyperbolic_scene,
    orbit_distance,
    quadratic_scene,
)
from .integrate import NonFiniteState, StepperConfig, integrate_state

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

DEFAULTS = {
    "simulate": dict(
        k=1.0, a=1.0 / math.sqrt(2.0), x0=1.0, z0=1.0, t0=0.0, t_end=60.0,
        h=1e-3, method="RK4", escape_radius=1e6, out="trajectory.csv",
    ),
    "floquet": dict(
        delta_min=0.0, delta_max=4.0, step=0.01, h=math.pi / 2000,
        tol=1e-6, threads=1, out="floquet.csv",
    ),
    "lyapunov": dict(delta=0.43, eta="auto", samples=10_000, out="lyapunov.json"),
    "doa": dict(
        k=1.0, a=1.0 / math.sqrt(2.0), x_min=-4.0, x_max=4.0, z_min=-4.0, z_max=4.0,
        nx=200, nz=200, n_t0=16, periods=100.0, tol=None, escape_radius=1e3,
        steps_per_period=1000, threads=1, out="doa.csv", summary_out=None,
    ),
    "observability": dict(
        x=0.5, z=1.0, gamma="quadratic", c0=1.0, c1=1.0, seed=0,
        n_feedbacks=100, n_points=100, out="observability.json",
    ),
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    sup = argparse.SUPPRESS
    p = argparse.ArgumentParser(prog="activesense", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, argument_default=sup)
        sp.add_argument("--config", help="JSON file with parameter values")
        sp.add_argument("--out", help="output file")
        return sp

    s = add("simulate", "integrate the nonlinear closed loop, write (t, x, z, u)")
    for f in ("k", "a", "x0", "z0", "t0", "t-end", "h", "escape-radius"):
        s.add_argument(f"--{f}", type=float)
    s.add_argument("--method", choices=["RK4", "DP45"])

    f = add("floquet", "sweep delta, write monodromy and multipliers")
    for name in ("delta-min", "delta-max", "step", "h", "tol"):
        f.add_argument(f"--{name}", type=float)
    f.add_argument("--threads", type=int)

    ly = add("lyapunov", "check the quadratic certificate for one delta")
    ly.add_argument("--delta", type=float)
    ly.add_argument("--eta", help="'auto' for 1 + sqrt(7), or a number > 1")
    ly.add_argument("--samples", type=int)

    d = add("doa", "classify a grid of initial states for sampled initial times")
    for name in ("k", "a", "x-min", "x-max", "z-min", "z-max", "periods", "tol", "escape-radius"):
        d.add_argument(f"--{name}", type=float)
    for name in ("nx", "nz", "n-t0", "steps-per-period", "threads"):
        d.add_argument(f"--{name}", type=int)
    d.add_argument("--summary-out")

    o = add("observability", "observability report plus randomized impossibility check")
    for name in ("x", "z", "c0", "c1"):
        o.add_argument(f"--{name}", type=float)
    o.add_argument("--gamma", choices=["quadratic", "hyperbolic"])
    for name in ("seed", "n-feedbacks", "n-points"):
        o.add_argument(f"--{name}", type=int)
    return p


def _settings(ns: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cmd = ns.command
    opts = dict(DEFAULTS[cmd])
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    cfg_path = getattr(ns, "config", None)
    if cfg_path is not None:
        with open(cfg_path, encoding="utf-8") as fh:
            try:
                from_file = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"config file {cfg_path}: {exc}") from exc
        if not isinstance(from_file, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(from_file) - set(opts)
        if unknown:
            raise UsageError(f"unknown config keys for {cmd}: {sorted(unknown)}")
        opts.update(from_file)
    opts.update(flags)
    return opts


def _positive_int(name, v):
    if int(v) != v or v < 1:
        raise ValueError(f"{name} must be a positive integer, got {v}")
    return int(v)


def cmd_simulate(o: dict) -> str:
    params = SystemParams(k=float(o["k"]), a=float(o["a"]))
    cfg = StepperConfig(h=float(o["h"]), method=o["method"], escape_radius=float(o["escape_radius"]))
    t0, t_end = float(o["t0"]), float(o["t_end"])
    if not t_end > t0:
        raise ValueError("t-end must exceed t0")
    s0 = (float(o["x0"]), float(o["z0"]))
    if not all(map(math.isfinite, s0)):
        raise ValueError("initial state must be finite")
    traj = integrate_state(closed_loop_rhs(params), s0, t0, t_end, cfg, params)
    u = [control_law(s, t, params) for t, s in zip(traj.t, traj.states)]
    csvio.write_csv(o["out"], csvio.TRAJECTORY_HEADER, csvio.trajectory_rows(traj, u))
    dist = orbit_distance(traj.t, traj.states, params.a)
    tail = dist[traj.t >= traj.t[-1] - 2 * math.pi]
    return (
        f"simulate: {len(traj)} samples to t={traj.t[-1]:.6g}"
        f"{' (escaped)' if traj.truncated else ''}; orbit distance final={dist[-1]:.3e},"
        f" max over last period={tail.max():.3e} -> {o['out']}"
    )


def _critical_from_sweep(results, cfg, tol):
    for left, right in zip(results, results[1:]):
        if left.stable and not right.stable and not right.error:
            return floquet.find_critical_delta(left.delta, right.delta, tol, cfg)
    return None


def cmd_floquet(o: dict) -> str:
    cfg = StepperConfig(h=float(o["h"]))
    workers = _positive_int("threads", o["threads"])
    tol = float(o["tol"])
    if not tol > 0:
        raise ValueError("tol must be positive")
    floquet.delta_grid(float(o["delta_min"]), float(o["delta_max"]), float(o["step"]))
    results = floquet.sweep_delta(
        float(o["delta_min"]), float(o["delta_max"]), float(o["step"]), cfg, workers=workers
    )
    csvio.write_csv(o["out"], csvio.FLOQUET_HEADER, csvio.floquet_rows(results))
    crit = _critical_from_sweep(results, cfg, tol)
    window = floquet.discriminant_crossings(results, tol, cfg)
    crit_s = f"{crit:.6f}" if crit is not None else "none in range"
    window_s = ", ".join(f"{w:.4f}" for w in window) or "none"
    return (
        f"floquet: {len(results)} points; critical delta* = {crit_s};"
        f" real/complex switches at {window_s} -> {o['out']}"
    )


def cmd_lyapunov(o: dict) -> str:
    eta = o["eta"]
    eta = None if str(eta).lower() == "auto" else float(eta)
    samples = _positive_int("samples", o["samples"])
    delta = float(o["delta"])
    if not (math.isfinite(delta) and delta >= 0):
        raise ValueError("delta must be finite and >= 0")
    cert = lyapunov.certify(delta, eta, samples)
    d_dag, e_dag = lyapunov.analytic_bounds()
    payload = cert.to_json_dict()
    payload["deltaDagger"] = d_dag
    payload["etaDagger"] = e_dag
    csvio.write_json(o["out"], payload)
    return (
        f"lyapunov: delta={cert.delta:.6g} eta={cert.eta:.10g} verified={cert.verified}"
        f" min det Q={cert.worst_det_q:.3e} at t={cert.argmin_t:.4f} -> {o['out']}"
    )


def cmd_doa(o: dict) -> str:
    params = SystemParams(k=float(o["k"]), a=float(o["a"]))
    cfg = doa.DoaConfig(
        x_range=(float(o["x_min"]), float(o["x_max"])),
        z_range=(float(o["z_min"]), float(o["z_max"])),
        nx=_positive_int("nx", o["nx"]),
        nz=_positive_int("nz", o["nz"]),
        t0_samples=doa.uniform_t0(_positive_int("n-t0", o["n_t0"])),
        horizon=float(o["periods"]) * doa.TWO_PI,
        convergence_tol=None if o["tol"] is None else float(o["tol"]),
        escape_radius=float(o["escape_radius"]),
        params=params,
        steps_per_period=_positive_int("steps-per-period", o["steps_per_period"]),
    )
    workers = _positive_int("threads", o["threads"])
    grid = doa.compute_grid(cfg, workers=workers, chunks_per_t0=workers)
    summary = o["summary_out"] or _summary_path(o["out"])
    csvio.write_csv(o["out"], csvio.DOA_LONG_HEADER, csvio.doa_long_rows(grid))
    csvio.write_csv(summary, csvio.DOA_SUMMARY_HEADER, csvio.doa_summary_rows(grid))
    c = grid.counts()
    return (
        f"doa: {cfg.nx}x{cfg.nz} cells x {len(cfg.t0_samples)} t0; conservative={c['conservative']}"
        f" alwaysDiverges={c['alwaysDiverges']} t0Dependent={c['t0Dependent']}"
        f" undecided={c['undecided']} -> {o['out']}, {summary}"
    )


def _summary_path(out: str) -> str:
    stem = out[:-4] if out.endswith(".csv") else out
    return stem + "_summary.csv"


def cmd_observability(o: dict) -> str:
    if o["gamma"] == "quadratic":
        gamma = quadratic_scene()
    else:
        c0, c1 = float(o["c0"]), float(o["c1"])
        gamma = hyperbolic_scene(c0, c1)
        if c1 * float(o["x"]) + c0 == 0:
            raise ValueError("hyperbolic scene is singular at this x")
    x, z = float(o["x"]), float(o["z"])
    if not (math.isfinite(x) and math.isfinite(z)):
        raise ValueError("state must be finite")
    n_fb = _positive_int("n-feedbacks", o["n_feedbacks"])
    n_pts = _positive_int("n-points", o["n_points"])
    rep = observability.report((x, z), gamma)
    rng = np.random.default_rng(int(o["seed"]))
    worst = 0.0
    for _ in range(n_fb):
        fb = observability.random_feedback(rng)
        shift = rng.uniform(-10, 10, n_pts)
        t = rng.uniform(0, 4 * math.pi, n_pts)
        q = rng.normal(size=(fb.nq, n_pts))
        worst = max(worst, float(observability.impossibility_witness(fb, shift, t, q).max()))
    payload = rep.to_json_dict()
    payload["impossibility"] = {
        "seed": int(o["seed"]),
        "feedbacks": n_fb,
        "pointsPerFeedback": n_pts,
        "maxDiscrepancy": worst,
    }
    csvio.write_json(o["out"], payload)
    return (
        f"observability: rank={rep.linear_rank} condition={rep.nonlinear_condition:.6g}"
        f" locallyObservable={rep.locally_observable}; impossibility max discrepancy={worst:g}"
        f" over {n_fb}x{n_pts} -> {o['out']}"
    )


COMMANDS = {
    "simulate": cmd_simulate,
    "floquet": cmd_floquet,
    "lyapunov": cmd_lyapunov,
    "doa": cmd_doa,
    "observability": cmd_observability,
}


def run(argv=None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        opts = _settings(ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        line = COMMANDS[ns.command](opts)
    except (ValueError, TypeError, NonFiniteState) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(line)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

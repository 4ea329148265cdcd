"""Command-line front end: ``stroke``, ``tomo``, ``iterate`` and ``sweep``.

Outputs are CSV (tables, trajectories) or JSON (map reports). Floats are
written with ``repr`` so every value parses back to the identical double,
and each file is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .channel import affine_tomography
from .errors import (
    ConvergenceFailure,
    InvalidOperator,
    InvalidParameter,
    InvalidState,
    StructureViolation,
    TruncationFailure,
)
from .evolve import converged_stroke, stroke_trajectory
from .model import SimParams, WindowKind, swap_time
from .operators import BlochVector, density_of
from .otto import CycleTrajectory, fixed_point, iterate_channel, temperature
from .sweep import SweepMode, SweepSpec, SweepTable, grid, run_sweep
from .channel import embed_vacuum

log = logging.getLogger("casimir_otto")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _atomic_write(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(columns, rows, metadata: dict | None = None) -> str:
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}: {json.dumps(value, sort_keys=True)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(table, path, metadata: dict | None = None):
    """Write a SweepTable, CycleTrajectory, or (columns, rows) pair as CSV."""
    if isinstance(table, SweepTable):
        columns, rows = table.columns, table.rows
        metadata = {**table.metadata, **(metadata or {})}
    elif isinstance(table, CycleTrajectory):
        omega = table.params_echo.omega if table.params_echo is not None else 1.0
        columns = ("n", "x", "y", "z", "temperature")
        rows = [(k, *r, temperature(float(np.clip(r[2], -1, 1)), omega)) for k, r in enumerate(table.bloch.tolist())]
        if table.params_echo is not None:
            metadata = {"params": table.params_echo.echo(), **(metadata or {})}
    else:
        columns, rows = table
    _atomic_write(path, render_csv(columns, rows, metadata))


def write_json(report: dict, path):
    _atomic_write(path, json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n")


def initial_bloch(selector: str) -> BlochVector:
    """Map an initial-state selector to its Bloch vector."""
    fixed = {
        "ground": (0.0, 0.0, 1.0),
        "excited": (0.0, 0.0, -1.0),
        "mixed": (0.0, 0.0, 0.0),
        "plus": (1.0, 0.0, 0.0),
    }
    if selector in fixed:
        return BlochVector(*fixed[selector])
    if selector.startswith("thermal:"):
        try:
            p = float(selector.split(":", 1)[1])
        except ValueError:
            raise InvalidParameter(f"bad thermal population in {selector!r}") from None
        if not 0 < p < 1:
            raise InvalidParameter("thermal ground population must lie in (0, 1)")
        return BlochVector(0.0, 0.0, 2 * p - 1)
    raise InvalidParameter(f"unknown initial state {selector!r}")


def _add_physics(ap: argparse.ArgumentParser, with_tau=True, with_g=True):
    if with_g:
        ap.add_argument("--g", type=float, required=True, help="coupling strength (units of omega)")
    if with_tau:
        tau = ap.add_mutually_exclusive_group(required=True)
        tau.add_argument("--tau", type=float, help="stroke duration (units of 1/omega)")
        tau.add_argument("--tau-swap-units", type=float, help="stroke duration in units of pi/(2g)")
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--omega-a", type=float, default=1.0)
    ap.add_argument("--window", choices=["rect", "hamming"], default="rect")
    ap.add_argument("--alpha", type=float, default=1.0, help="Hamming stretch factor")
    ap.add_argument("--rwa", action="store_true", help="drop the counter-rotating terms")
    ap.add_argument("--nmax", type=int, default=32, help="initial Fock cutoff")
    ap.add_argument("--step-tol", type=float, default=1e-9)
    ap.add_argument("--trunc-tol", type=float, default=1e-10)
    ap.add_argument("--integrator", choices=["cf4", "midpoint"], default="cf4")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="casimir-otto", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    st = sub.add_parser("stroke", help="qubit observables during one stroke")
    _add_physics(st)
    st.add_argument("--init", default="ground")
    st.add_argument("--samples", type=int, default=200)
    st.add_argument("--out", required=True)

    tm = sub.add_parser("tomo", help="affine map and fixed point of one cycle")
    _add_physics(tm)
    tm.add_argument("--out", required=True)

    it = sub.add_parser("iterate", help="Bloch trajectory over repeated cycles")
    _add_physics(it)
    it.add_argument("--init", default="ground")
    it.add_argument("--cycles", type=int, default=100)
    it.add_argument("--out", required=True)

    sw = sub.add_parser("sweep", help="parameter maps over g and tau")
    _add_physics(sw, with_tau=False, with_g=False)
    sw.add_argument("--mode", choices=[m.value for m in SweepMode], required=True)
    sw.add_argument("--g-min", type=float, default=0.02)
    sw.add_argument("--g-max", type=float, default=1.0)
    sw.add_argument("--g-steps", type=int, default=50)
    sw.add_argument("--tau-min", type=float, default=0.05, help="in units of the swap time")
    sw.add_argument("--tau-max", type=float, default=4.0)
    sw.add_argument("--tau-steps", type=int, default=80)
    sw.add_argument("--windows", default="rect,hamming:1,hamming:2")
    sw.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sw.add_argument("--out", required=True)
    return ap


def params_from_args(args, g=None, tau=None) -> SimParams:
    g = args.g if g is None else g
    if tau is None:
        if getattr(args, "tau", None) is not None:
            tau = args.tau
        else:
            tau = args.tau_swap_units * swap_time(g)
    return SimParams(
        g=g,
        tau=tau,
        omega=args.omega,
        omega_a=args.omega_a,
        window=WindowKind(args.window),
        alpha=args.alpha,
        rwa=args.rwa,
        n_max=args.nmax,
        step_tol=args.step_tol,
        trunc_tol=args.trunc_tol,
        integrator=args.integrator,
    )


def parse_windows(text: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if item == "rect":
            out.append((WindowKind.RECTANGULAR, 1.0))
        elif item.startswith("hamming:"):
            out.append((WindowKind.HAMMING, float(item.split(":", 1)[1])))
        else:
            raise InvalidParameter(f"unknown window {item!r}")
    return tuple(out)


def _cmd_stroke(args):
    p = params_from_args(args)
    prop = converged_stroke(p)
    p = p.replace(n_max=prop.trunc_used)
    rho0 = embed_vacuum(density_of(initial_bloch(args.init)), p.n_max)
    traj = stroke_trajectory(p, rho0, args.samples)
    rows = [(t, r.x, r.y, r.z, n) for t, r, n in traj]
    meta = {"params": p.echo(), "init": args.init, "samples": args.samples}
    write_csv((("t", "x", "y", "z", "mean_n"), rows), args.out, meta)


def tomo_report(p: SimParams) -> dict:
    prop = converged_stroke(p)
    amap = affine_tomography(prop)
    rep = fixed_point(amap)
    return {
        "params": p.echo(),
        "m": [float(v) for v in amap.m.ravel()],
        "a": [float(v) for v in amap.a],
        "residual": amap.residual,
        "z_inf": rep.z_inf,
        "m_zz": rep.m_zz,
        "a_z": rep.a_z,
        "xy_decay_modulus": rep.xy_decay_modulus,
        "degenerate": rep.degenerate,
        "n_max": prop.trunc_used,
        "steps_used": prop.steps_used,
    }


def _cmd_tomo(args):
    write_json(tomo_report(params_from_args(args)), args.out)


def _cmd_iterate(args):
    if args.cycles < 0:
        raise InvalidParameter("--cycles must be non-negative")
    p = params_from_args(args)
    prop = converged_stroke(p)
    traj = iterate_channel(initial_bloch(args.init), prop, args.cycles, p)
    write_csv(traj, args.out, {"init": args.init, "n_max": prop.trunc_used, "steps_used": prop.steps_used})


def _cmd_sweep(args):
    base = params_from_args(args, g=1.0, tau=0.0)
    spec = SweepSpec(
        mode=SweepMode(args.mode),
        g_grid=grid(args.g_min, args.g_max, args.g_steps),
        tau_grid=grid(args.tau_min, args.tau_max, args.tau_steps),
        windows=parse_windows(args.windows),
        base=base,
    )
    table = run_sweep(spec, workers=args.workers)
    write_csv(table, args.out)
    if table.metadata["errors"]:
        return EXIT_FAILURE
    return EXIT_OK


COMMANDS = {"stroke": _cmd_stroke, "tomo": _cmd_tomo, "iterate": _cmd_iterate, "sweep": _cmd_sweep}


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args) or EXIT_OK
    except (InvalidParameter, InvalidState, InvalidOperator) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceFailure, TruncationFailure, StructureViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Parameter sweeps behind the single-stroke, asymptotic and window-comparison maps.

Every grid point is an independent computation. Points are enumerated in
lexicographic order (outer g, inner tau or window) and results land in
pre-indexed slots, so the table never depends on the worker count.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import affine_tomography
from .errors import ConvergenceFailure, InvalidParameter, TruncationFailure
from .evolve import converged_stroke
from .model import SimParams, WindowKind, swap_time
from .otto import fixed_point

log = logging.getLogger(__name__)


class SweepMode(str, enum.Enum):
    SINGLE_STROKE = "single-stroke"
    ASYMPTOTIC = "asymptotic"
    WINDOWS = "windows"


COLUMNS = {
    SweepMode.SINGLE_STROKE: ("g", "tau_over_taus", "z"),
    SweepMode.ASYMPTOTIC: ("g", "tau_over_taus", "m_zz", "a_z", "z_inf", "residual"),
    SweepMode.WINDOWS: ("g", "window", "alpha", "z_inf"),
}

DEFAULT_WINDOWS = ((WindowKind.RECTANGULAR, 1.0), (WindowKind.HAMMING, 1.0), (WindowKind.HAMMING, 2.0))


def grid(lo: float, hi: float, steps: int) -> tuple[float, ...]:
    if steps < 1:
        raise InvalidParameter("grid needs at least one point")
    if steps == 1:
        return (float(lo),)
    return tuple(float(v) for v in np.round(np.linspace(lo, hi, steps), 12))


DEFAULT_G_GRID = grid(0.02, 1.0, 50)
DEFAULT_TAU_GRID = grid(0.05, 4.0, 80)


@dataclass(frozen=True)
class SweepSpec:
    mode: SweepMode
    g_grid: tuple = DEFAULT_G_GRID
    tau_grid: tuple = DEFAULT_TAU_GRID
    windows: tuple = DEFAULT_WINDOWS
    base: SimParams = field(default_factory=lambda: SimParams(g=0.5, tau=math.pi))

    def __post_init__(self):
        object.__setattr__(self, "mode", SweepMode(self.mode))
        object.__setattr__(self, "g_grid", tuple(float(g) for g in self.g_grid))
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        object.__setattr__(
            self, "windows", tuple((WindowKind(w), float(a)) for w, a in self.windows)
        )
        _check_grid("g_grid", self.g_grid)
        if any(g <= 0 for g in self.g_grid):
            raise InvalidParameter("g = 0 is degenerate; sweep couplings must be positive")
        if self.mode is not SweepMode.WINDOWS:
            _check_grid("tau_grid", self.tau_grid)
            if any(t < 0 for t in self.tau_grid):
                raise InvalidParameter("tau ratios must be non-negative")
        elif not self.windows:
            raise InvalidParameter("windows sweep needs at least one window")

    def points(self) -> list[SimParams]:
        out = []
        for g in self.g_grid:
            ts = swap_time(g)
            if self.mode is SweepMode.WINDOWS:
                for kind, alpha in self.windows:
                    out.append(self.base.replace(g=g, tau=ts, window=kind, alpha=alpha))
            else:
                for ratio in self.tau_grid:
                    out.append(
                        self.base.replace(g=g, tau=ratio * ts, window=WindowKind.RECTANGULAR)
                    )
        return out

    def echo(self) -> dict:
        return {
            "mode": self.mode.value,
            "g_grid": list(self.g_grid),
            "tau_grid": list(self.tau_grid) if self.mode is not SweepMode.WINDOWS else None,
            "windows": [[k.value, a] for k, a in self.windows] if self.mode is SweepMode.WINDOWS else None,
            "base": self.base.echo(),
        }


def _check_grid(name, values):
    if not values:
        raise InvalidParameter(f"{name} is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidParameter(f"{name} must be strictly increasing")


@dataclass
class SweepTable:
    columns: tuple
    rows: list
    metadata: dict

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _qubit_z_from_ground(prop) -> float:
    psi = prop.u[:, 0]
    half = psi.shape[0] // 2
    pops = np.abs(psi) ** 2
    return float(pops[:half].sum() - pops[half:].sum())


def _evaluate(args) -> dict:
    """Worker entry point for one grid point."""
    mode, p = args
    ratio = p.tau / swap_time(p.g)
    out = {"n_max": None, "steps": None, "error": None, "degenerate": False}
    try:
        prop = converged_stroke(p)
        out["n_max"], out["steps"] = prop.trunc_used, prop.steps_used
        if mode is SweepMode.SINGLE_STROKE:
            out["row"] = (p.g, ratio, _qubit_z_from_ground(prop))
            return out
        amap = affine_tomography(prop)
        rep = fixed_point(amap)
        out["degenerate"] = rep.degenerate
        z_inf = math.nan if rep.degenerate else rep.z_inf
        if mode is SweepMode.ASYMPTOTIC:
            out["row"] = (p.g, ratio, rep.m_zz, rep.a_z, z_inf, amap.residual)
        else:
            out["row"] = (p.g, p.window.value, p.alpha, z_inf)
    except (ConvergenceFailure, TruncationFailure) as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
        if mode is SweepMode.WINDOWS:
            out["row"] = (p.g, p.window.value, p.alpha, math.nan)
        else:
            out["row"] = (p.g, ratio) + (math.nan,) * (len(COLUMNS[mode]) - 2)
    return out


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    tasks = [(spec.mode, p) for p in spec.points()]
    results = [None] * len(tasks)
    if workers <= 1:
        for i, t in enumerate(tasks):
            results[i] = _evaluate(t)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, res in enumerate(pool.map(_evaluate, tasks, chunksize=1)):
                results[i] = res
    errors = {str(i): r["error"] for i, r in enumerate(results) if r["error"]}
    for i, msg in errors.items():
        log.warning("sweep point %s failed: %s", i, msg)
    metadata = {
        "spec": spec.echo(),
        "step_tol": spec.base.step_tol,
        "trunc_tol": spec.base.trunc_tol,
        "converged_n_max": [r["n_max"] for r in results],
        "steps_used": [r["steps"] for r in results],
        "errors": errors,
        "degenerate_rows": [i for i, r in enumerate(results) if r["degenerate"]],
    }
    return SweepTable(COLUMNS[spec.mode], [r["row"] for r in results], metadata)


def sweep_single_stroke(spec: SweepSpec, workers: int = 1) -> SweepTable:
    if spec.mode is not SweepMode.SINGLE_STROKE:
        raise InvalidParameter("sweep_single_stroke needs mode single-stroke")
    return run_sweep(spec, workers)


def sweep_asymptotic(spec: SweepSpec, workers: int = 1) -> SweepTable:
    if spec.mode is not SweepMode.ASYMPTOTIC:
        raise InvalidParameter("sweep_asymptotic needs mode asymptotic")
    return run_sweep(spec, workers)


def sweep_windows(spec: SweepSpec, workers: int = 1) -> SweepTable:
    if spec.mode is not SweepMode.WINDOWS:
        raise InvalidParameter("sweep_windows needs mode windows")
    return run_sweep(spec, workers)


def total_variation(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(np.abs(np.diff(v)).sum())

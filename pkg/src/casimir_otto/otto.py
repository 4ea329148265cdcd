"""Repeated cycles: Bloch trajectories, the asymptotic fixed point and temperature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import AffineMap, kraus_operators
from .errors import InvalidState, StructureViolation
from .model import SimParams
from .operators import BlochVector, density_of

DEGENERACY_TOL = 1e-12
STRUCTURE_TOL = 1e-6
MAX_CYCLES = 10**6
EARLY_EXIT_TOL = 1e-14


@dataclass(frozen=True)
class CycleTrajectory:
    """Bloch vectors after 0, 1, ..., n cycles; row k of ``bloch`` is r_k."""

    bloch: np.ndarray
    params_echo: SimParams | None = None

    @property
    def entries(self) -> list[tuple[int, BlochVector]]:
        return [(k, BlochVector.from_array(r)) for k, r in enumerate(self.bloch)]

    def __len__(self) -> int:
        return len(self.bloch)


@dataclass(frozen=True)
class FixedPointReport:
    z_inf: float | None
    m_zz: float
    a_z: float
    xy_decay_modulus: float
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "z_inf": self.z_inf,
            "m_zz": self.m_zz,
            "a_z": self.a_z,
            "xy_decay_modulus": self.xy_decay_modulus,
            "degenerate": self.degenerate,
        }


def _check_ball(r: np.ndarray):
    if np.linalg.norm(r) > 1 + 1e-10:
        raise InvalidState(f"initial Bloch vector {r} lies outside the unit ball")


def iterate(r0, amap: AffineMap, n: int, params: SimParams | None = None) -> CycleTrajectory:
    """r_k = M r_{k-1} + a for k = 1..n."""
    r = np.asarray(r0.as_array() if isinstance(r0, BlochVector) else r0, dtype=float)
    _check_ball(r)
    out = np.empty((n + 1, 3))
    out[0] = r
    for k in range(1, n + 1):
        r = amap.m @ r + amap.a
        out[k] = r
    return CycleTrajectory(out, params)


def iterate_channel(r0, u, n: int, params: SimParams | None = None) -> CycleTrajectory:
    """Same trajectory as ``iterate`` but by applying the joint-evolution cycle n times."""
    r = np.asarray(r0.as_array() if isinstance(r0, BlochVector) else r0, dtype=float)
    _check_ball(r)
    rho = density_of(r)
    kraus = kraus_operators(u)
    kraus_dag = kraus.conj().transpose(0, 2, 1)
    out = np.empty((n + 1, 3))
    out[0] = r
    for k in range(1, n + 1):
        rho = np.sum(kraus @ rho @ kraus_dag, axis=0)
        out[k] = (2 * rho[1, 0].real, 2 * rho[1, 0].imag, (rho[0, 0] - rho[1, 1]).real)
    return CycleTrajectory(out, params)


def iterate_until_converged(
    r0, amap: AffineMap, max_cycles: int = MAX_CYCLES, tol: float = EARLY_EXIT_TOL
) -> tuple[np.ndarray, int]:
    """Iterate until successive z differ by less than ``tol``; returns (r, cycles)."""
    r = np.asarray(r0.as_array() if isinstance(r0, BlochVector) else r0, dtype=float)
    for k in range(1, max_cycles + 1):
        nxt = amap.m @ r + amap.a
        if abs(nxt[2] - r[2]) < tol:
            return nxt, k
        r = nxt
    return r, max_cycles


def fixed_point(amap: AffineMap) -> FixedPointReport:
    if amap.residual >= STRUCTURE_TOL:
        raise StructureViolation(
            f"off-structure entries up to {amap.residual:.3g}; closed-form fixed point not valid"
        )
    m_zz, a_z = amap.m_zz, amap.a_z
    rho = float(np.max(np.abs(np.linalg.eigvals(amap.xy_block))))
    if abs(1 - m_zz) < DEGENERACY_TOL:
        return FixedPointReport(None, m_zz, a_z, rho, True)
    return FixedPointReport(a_z / (1 - m_zz), m_zz, a_z, rho, False)


def temperature(z: float, omega: float = 1.0) -> float:
    """Qubit temperature from the Bloch z (ground population (1+z)/2), k_B = 1.

    Returns 0 at z = 1, +inf at z = 0, and a negative value for inverted
    populations (z < 0).
    """
    if abs(z) > 1 + 1e-12:
        raise InvalidState(f"|z| = {abs(z)} exceeds 1")
    if z >= 1:
        return 0.0
    if z == 0:
        return math.inf
    if z <= -1:
        return -0.0
    p = (1 + z) / 2
    return omega / math.log(p / (1 - p))


def population_inverted(z: float) -> bool:
    return z < 0


def xy_transient_constant(xy_block: np.ndarray) -> float:
    """Condition number of the eigenvector basis of the xy block.

    ``|B^n v| <= C rho(B)^n |v|`` with this C; it equals 1 when B is normal.
    """
    w, v = np.linalg.eig(xy_block)
    if abs(w[0] - w[1]) < 1e-14 and not np.allclose(xy_block, np.diag(np.diag(xy_block))):
        return math.inf
    return float(np.linalg.cond(v))


def convergence_check(traj: CycleTrajectory, report: FixedPointReport, xy_block=None) -> float:
    """Largest violation of the geometric approach to the fixed point.

    z must follow ``z_n - z_inf = m_zz^n (z_0 - z_inf)``; |x_n| and |y_n| must
    stay below ``C rho^n |(x_0, y_0)| (1 + 1e-9)`` where rho is the xy spectral
    radius and C the transient constant of the xy block (1 when ``xy_block``
    is omitted or normal).
    """
    if report.degenerate:
        raise ValueError("convergence_check needs a non-degenerate fixed point")
    r = traj.bloch
    n = np.arange(len(r))
    z_pred = report.z_inf + report.m_zz**n * (r[0, 2] - report.z_inf)
    worst = float(np.max(np.abs(r[:, 2] - z_pred)))
    c = 1.0 if xy_block is None else xy_transient_constant(np.asarray(xy_block))
    bound = c * report.xy_decay_modulus**n * np.hypot(r[0, 0], r[0, 1]) * (1 + 1e-9)
    excess = np.maximum(np.abs(r[:, :2]) - bound[:, None], 0.0)
    return max(worst, float(excess.max()))


def cycles_to_reach(report: FixedPointReport, z0: float, eps: float) -> int:
    """Closed-form number of cycles until |z_n - z_inf| < eps."""
    gap = abs(z0 - report.z_inf)
    if gap < eps:
        return 0
    m = abs(report.m_zz)
    if m == 0:
        return 1
    return math.floor(math.log(eps / gap) / math.log(m)) + 1

"""One-cycle qubit channel and its affine Bloch-ball representation.

A cycle couples the qubit to a fresh vacuum oscillator for one stroke and
discards the oscillator afterwards. In Bloch coordinates the channel is the
affine map ``r -> M r + a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOperator
from .evolve import Propagator
from .operators import (
    IDENTITY_2,
    PAULIS,
    BlochVector,
    JointState,
    bloch_of,
    density_of,
    fock,
    partial_trace_osc,
)

# (row, col) entries of M that vanish for a parity-symmetric channel
_OFF_STRUCTURE_M = ((0, 2), (1, 2), (2, 0), (2, 1))


@dataclass(frozen=True)
class AffineMap:
    m: np.ndarray
    a: np.ndarray
    residual: float = 0.0

    @property
    def m_zz(self) -> float:
        return float(self.m[2, 2])

    @property
    def a_z(self) -> float:
        return float(self.a[2])

    @property
    def xy_block(self) -> np.ndarray:
        return self.m[:2, :2]

    def __call__(self, r) -> np.ndarray:
        return self.m @ np.asarray(r, dtype=float) + self.a

    def compose(self, other: "AffineMap") -> "AffineMap":
        """``self`` applied after ``other``."""
        m = self.m @ other.m
        a = self.m @ other.a + self.a
        return with_residual(m, a)

    def to_dict(self) -> dict:
        return {
            "m": [float(v) for v in self.m.ravel()],
            "a": [float(v) for v in self.a],
            "residual": float(self.residual),
        }


def with_residual(m, a) -> AffineMap:
    m = np.asarray(m, dtype=float)
    a = np.asarray(a, dtype=float)
    return AffineMap(m, a, structure_residual(AffineMap(m, a)))


def _unitary(u) -> np.ndarray:
    return u.u if isinstance(u, Propagator) else np.asarray(u)


def _vacuum_columns(u: np.ndarray) -> np.ndarray:
    """Columns of U acting on ``|g,0>`` and ``|e,0>``."""
    dim = u.shape[0]
    if u.ndim != 2 or u.shape[1] != dim or dim < 4 or dim % 2:
        raise InvalidOperator(f"propagator of shape {u.shape} is not a qubit x oscillator operator")
    return u[:, [0, dim // 2]]


def embed_vacuum(rho_q: np.ndarray, n_max: int) -> JointState:
    vac = fock(0, n_max)
    return JointState.product(np.asarray(rho_q, dtype=complex), np.outer(vac, vac.conj()))


def apply_cycle(rho_q: np.ndarray, u) -> np.ndarray:
    """``Tr_o[U (rho_q (x) |0><0|) U^dag]``.

    The embedded state is supported on the two vacuum columns, so the
    conjugation only needs those columns of U.
    """
    rho_q = np.asarray(rho_q)
    if rho_q.shape != (2, 2):
        raise InvalidOperator(f"qubit state must be 2x2, got {rho_q.shape}")
    k = _vacuum_columns(_unitary(u))
    joint = k @ rho_q @ k.conj().T
    return partial_trace_osc(joint)


def kraus_operators(u) -> np.ndarray:
    """Kraus operators ``K_n = <n|U|0>`` of the cycle, shape (n_max+1, 2, 2)."""
    k = _vacuum_columns(_unitary(u))
    d = k.shape[0] // 2
    return k.reshape(2, d, 2).transpose(1, 0, 2).copy()


def tomography_of(channel) -> AffineMap:
    """Affine map of any qubit channel given as ``rho -> rho'``.

    Probes are the maximally mixed state (giving a) and the +x, +y, +z pure
    states (giving the columns of M after subtracting a).
    """
    image = lambda r: bloch_of(channel(density_of(r))).as_array()  # noqa: E731
    a = image(np.zeros(3))
    cols = [image(e) - a for e in np.eye(3)]
    return with_residual(np.column_stack(cols), a)


def affine_tomography(u) -> AffineMap:
    """Full 12-parameter affine map of one cycle driven by the propagator ``u``."""
    u = _unitary(u)
    return tomography_of(lambda rho: apply_cycle(rho, u))


def structure_residual(amap: AffineMap) -> float:
    """Largest entry among m_xz, m_yz, m_zx, m_zy, a_x, a_y."""
    vals = [amap.m[i, j] for i, j in _OFF_STRUCTURE_M] + [amap.a[0], amap.a[1]]
    return float(np.max(np.abs(vals)))


def channel_image(amap: AffineMap, x: np.ndarray) -> np.ndarray:
    """Linear extension of the channel to an arbitrary 2x2 operator."""
    tr = np.trace(x)
    r = np.array([np.trace(x @ s) for s in PAULIS])
    out_r = amap.m @ r + tr * amap.a
    return 0.5 * (tr * IDENTITY_2 + sum(c * s for c, s in zip(out_r, PAULIS)))


def choi_of(amap: AffineMap) -> np.ndarray:
    """``sum_ij |i><j| (x) E(|i><j|)``; trace 2, input factor first."""
    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e_ij = np.zeros((2, 2), dtype=complex)
            e_ij[i, j] = 1.0
            choi[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = channel_image(amap, e_ij)
    return choi


def choi_output_trace(choi: np.ndarray) -> np.ndarray:
    """Trace over the output factor; equals the identity for trace-preserving maps."""
    return np.einsum("iaja->ij", choi.reshape(2, 2, 2, 2))


def is_cptp(amap: AffineMap, tol: float = 1e-8) -> bool:
    choi = choi_of(amap)
    min_eig = np.linalg.eigvalsh(0.5 * (choi + choi.conj().T)).min()
    tp = np.max(np.abs(choi_output_trace(choi) - np.eye(2)))
    return bool(min_eig > -tol and tp < tol)


def apply_map(amap: AffineMap, r: BlochVector) -> BlochVector:
    return BlochVector.from_array(amap(r.as_array()))

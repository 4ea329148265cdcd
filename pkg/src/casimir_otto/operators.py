"""Dense operator algebra on the qubit x oscillator Hilbert space.

Basis convention, fixed here for the whole package: joint index
``k = q * (n_max + 1) + n`` with the qubit slow (``q = 0`` is ``|g>``,
``q = 1`` is ``|e>``) and the photon number ``n`` fast. ``|g>`` is the
``sigma_z = +1`` eigenvector, so Bloch ``z = +1`` is the ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOperator, InvalidParameter, InvalidState

HERMITIAN_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_+ |g> = |e>, sigma_- |e> = |g>
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-10:
            raise InvalidState(f"Bloch vector {self.as_array()} lies outside the unit ball")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    @classmethod
    def from_array(cls, r) -> "BlochVector":
        r = np.asarray(r, dtype=float)
        return cls(float(r[0]), float(r[1]), float(r[2]))


@dataclass(frozen=True)
class JointState:
    """Density matrix of the qubit and a truncated oscillator."""

    rho: np.ndarray
    n_max: int

    def __post_init__(self):
        dim = 2 * (self.n_max + 1)
        if self.rho.shape != (dim, dim):
            raise InvalidState(f"expected a {dim}x{dim} matrix, got {self.rho.shape}")

    def validate(self, herm_tol=1e-12, trace_tol=1e-12, psd_tol=1e-10) -> "JointState":
        rho = self.rho
        if np.max(np.abs(rho - rho.conj().T)) >= herm_tol:
            raise InvalidState("joint state is not Hermitian")
        if abs(np.trace(rho) - 1) >= trace_tol:
            raise InvalidState("joint state does not have unit trace")
        if np.linalg.eigvalsh(rho).min() <= -psd_tol:
            raise InvalidState("joint state is not positive semidefinite")
        return self

    @classmethod
    def product(cls, rho_q: np.ndarray, rho_o: np.ndarray) -> "JointState":
        return cls(kron(rho_q, rho_o), rho_o.shape[0] - 1)

    @classmethod
    def from_vector(cls, psi: np.ndarray, n_max: int) -> "JointState":
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()), n_max)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with ``a`` as the slow (left) factor."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InvalidOperator("kron expects square matrices")
    return np.kron(a, b)


def annihilation(n_max: int) -> np.ndarray:
    if n_max < 1:
        raise InvalidParameter(f"n_max must be >= 1, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def number_op(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)


def fock(n: int, n_max: int) -> np.ndarray:
    v = np.zeros(n_max + 1, dtype=complex)
    v[n] = 1.0
    return v


def joint_index(q: int, n: int, n_max: int) -> int:
    return q * (n_max + 1) + n


def parity_op(n_max: int) -> np.ndarray:
    """``sigma_z (x) (-1)^{a^dag a}``."""
    return kron(SIGMA_Z, np.diag((-1.0) ** np.arange(n_max + 1)).astype(complex))


def parity_blocks(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Joint indices of the even and odd parity sectors, each ordered by photon number.

    Within a sector the states alternate between ``|g>`` and ``|e>`` as n grows,
    so the Rabi Hamiltonian restricted to it is tridiagonal.
    """
    d = n_max + 1
    n = np.arange(d)
    even, odd = [], []
    for k in n:
        # |g,k> has parity (-1)^k, |e,k> has parity -(-1)^k
        (even if k % 2 == 0 else odd).append(joint_index(0, k, n_max))
        (odd if k % 2 == 0 else even).append(joint_index(1, k, n_max))
    key = lambda i: i % d  # noqa: E731
    return np.array(sorted(even, key=key)), np.array(sorted(odd, key=key))


def partial_trace_osc(s: JointState | np.ndarray, n_max: int | None = None) -> np.ndarray:
    """Trace out the oscillator, returning the 2x2 qubit density matrix."""
    if isinstance(s, JointState):
        rho, n_max = s.rho, s.n_max
    else:
        rho = np.asarray(s)
        if n_max is None:
            n_max = rho.shape[0] // 2 - 1
    d = n_max + 1
    return np.einsum("injn->ij", rho.reshape(2, d, 2, d))


def bloch_of(rho_q: np.ndarray) -> BlochVector:
    rho_q = np.asarray(rho_q)
    if rho_q.shape != (2, 2):
        raise InvalidState(f"expected a 2x2 qubit matrix, got {rho_q.shape}")
    r = [float(np.real(np.trace(rho_q @ s))) for s in PAULIS]
    return BlochVector(*r)


def density_of(r: BlochVector | np.ndarray) -> np.ndarray:
    if not isinstance(r, BlochVector):
        r = BlochVector.from_array(r)
    return 0.5 * (IDENTITY_2 + r.x * SIGMA_X + r.y * SIGMA_Y + r.z * SIGMA_Z)


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.max(np.abs(h - h.conj().T)) < tol


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h)
    if not is_hermitian(h):
        raise InvalidOperator("expm_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a

"""Time-dependent Rabi Hamiltonian of the cold isochore, with an RWA switch."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .operators import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    annihilation,
    kron,
    number_op,
)


class WindowKind(str, enum.Enum):
    RECTANGULAR = "rect"
    HAMMING = "hamming"


INTEGRATORS = ("cf4", "midpoint")


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical configuration of one stroke (hbar = k_B = omega = 1 units)."""

    g: float
    tau: float
    omega: float = 1.0
    omega_a: float = 1.0
    window: WindowKind = WindowKind.RECTANGULAR
    alpha: float = 1.0
    rwa: bool = False
    n_max: int = 32
    step_tol: float = 1e-9
    trunc_tol: float = 1e-10
    integrator: str = "cf4"

    def __post_init__(self):
        object.__setattr__(self, "window", WindowKind(self.window))
        if not (self.g >= 0 and self.tau >= 0):
            raise InvalidParameter(f"need g >= 0 and tau >= 0, got g={self.g}, tau={self.tau}")
        if not (self.omega > 0 and self.omega_a > 0):
            raise InvalidParameter("frequencies must be positive")
        if not self.alpha > 0:
            raise InvalidParameter(f"alpha must be positive, got {self.alpha}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InvalidParameter(f"n_max must be an integer >= 1, got {self.n_max}")
        if not (self.step_tol > 0 and self.trunc_tol > 0):
            raise InvalidParameter("tolerances must be positive")
        if self.integrator not in INTEGRATORS:
            raise InvalidParameter(f"unknown integrator {self.integrator!r}")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    @property
    def support(self) -> float:
        """Length of the interval on which the coupling is switched on."""
        if self.window is WindowKind.HAMMING:
            return self.alpha * self.tau
        return self.tau

    def replace(self, **changes) -> "SimParams":
        return dataclasses.replace(self, **changes)

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["window"] = self.window.value
        return d


def swap_time(g: float) -> float:
    """Resonant time for the full transfer |e,0> <-> |g,1>."""
    if not g > 0:
        raise InvalidParameter(f"swap time needs g > 0, got {g}")
    return math.pi / (2 * g)


def h0(p: SimParams) -> np.ndarray:
    nm = p.n_max
    qubit = -0.5 * p.omega_a * kron(SIGMA_Z, np.eye(nm + 1))
    field = p.omega * kron(np.eye(2), number_op(nm) + 0.5 * np.eye(nm + 1))
    return qubit + field


def h_int(p: SimParams) -> np.ndarray:
    """Coupling operator without the window factor, ``g sigma_+ (a^dag + a) + h.c.``"""
    a = annihilation(p.n_max)
    ad = a.conj().T
    if p.rwa:
        return p.g * (kron(SIGMA_PLUS, a) + kron(SIGMA_MINUS, ad))
    x = a + ad
    return p.g * (kron(SIGMA_PLUS, x) + kron(SIGMA_MINUS, x))


def window_value(p: SimParams, t: float) -> float:
    if p.window is WindowKind.HAMMING:
        length = p.alpha * p.tau
        if 0 <= t <= length and length > 0:
            return (1 - math.cos(2 * math.pi * t / length)) / p.alpha
        return 0.0
    return 1.0 if 0 <= t <= p.tau else 0.0


def h_total(p: SimParams, t: float) -> np.ndarray:
    return h0(p) + window_value(p, t) * h_int(p)


def excitation_number(n_max: int) -> np.ndarray:
    """Qubit excitation plus photon number; conserved by the RWA coupling."""
    return kron(np.diag([0.0, 1.0]).astype(complex), np.eye(n_max + 1)) + kron(
        np.eye(2), number_op(n_max)
    )

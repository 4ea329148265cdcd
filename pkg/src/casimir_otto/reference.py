"""Closed-form Jaynes-Cummings results at resonance, used as test oracles."""

from __future__ import annotations

import enum
import math

from .errors import InvalidParameter


class JCInitial(enum.Enum):
    GROUND_VACUUM = "ground"
    EXCITED_VACUUM = "excited"


def jc_bloch_z(g: float, t: float, init: JCInitial) -> float:
    """Qubit Bloch z under the resonant RWA Hamiltonian.

    ``|g,0>`` is an eigenstate, so z stays 1. ``|e,0>`` performs vacuum Rabi
    oscillations with ``|g,1>``: z(t) = -cos(2 g t).
    """
    if not g > 0 or t < 0:
        raise InvalidParameter("need g > 0 and t >= 0")
    init = JCInitial(init)
    if init is JCInitial.GROUND_VACUUM:
        return 1.0
    return -math.cos(2 * g * t)

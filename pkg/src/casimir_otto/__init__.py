"""Qubit cooling by repeated Rabi-coupled strokes with a vacuum-reset field mode."""

from .channel import AffineMap, affine_tomography, apply_cycle, choi_of, structure_residual
from .evolve import (
    Propagator,
    converged_stroke,
    ensure_truncation,
    propagate_constant,
    propagate_windowed,
    stroke_propagator,
    stroke_trajectory,
)
from .model import SimParams, WindowKind, h0, h_int, h_total, swap_time, window_value
from .operators import BlochVector, JointState, bloch_of, density_of
from .otto import FixedPointReport, fixed_point, iterate, iterate_channel, temperature

__version__ = "0.1.0"

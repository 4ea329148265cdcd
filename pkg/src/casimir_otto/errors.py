"""Exception hierarchy shared by every module."""


class SimulationError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParameter(SimulationError, ValueError):
    pass


class InvalidState(SimulationError, ValueError):
    pass


class InvalidOperator(SimulationError, ValueError):
    pass


class ConvergenceFailure(SimulationError, RuntimeError):
    """Time-ordered product did not converge within the step budget."""


class TruncationFailure(SimulationError, RuntimeError):
    """Fock cutoff kept growing past the hard ceiling."""


class StructureViolation(SimulationError, ValueError):
    """Affine map lacks the block structure required by the closed-form fixed point."""

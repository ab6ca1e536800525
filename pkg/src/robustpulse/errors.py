"""Exception types shared across the package."""


class RobustPulseError(Exception):
    """Base class for all package errors."""


class DomainError(RobustPulseError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(RobustPulseError, ValueError):
    """A value object fails its invariants."""


class UnrepresentableTargetError(RobustPulseError, ValueError):
    """Target rotation has no antisymmetric-pulse realization (csc singular)."""


class DegenerateZetaError(RobustPulseError, ValueError):
    """The periodic modulation integrates to (numerically) zero."""


class QuadratureError(RobustPulseError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class StiffnessError(RobustPulseError, RuntimeError):
    """Trajectory integration underflowed its step size."""

    def __init__(self, message: str, chi: float | None = None):
        super().__init__(message)
        self.chi = chi


class EndpointDivergenceError(RobustPulseError, RuntimeError):
    """Waveform amplitude diverges at the end of a general pulse."""


class IntegratorError(RobustPulseError, RuntimeError):
    """The Schroedinger propagator could not meet its local tolerance."""


class SolverExhaustionError(RobustPulseError, RuntimeError):
    """No constraint solution found within the restart budget."""

    def __init__(self, message: str, best_objective: float):
        super().__init__(message)
        self.best_objective = best_objective


class NoDecompositionError(RobustPulseError, RuntimeError):
    """Square-pulse decomposition failed for every wrapped branch."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual

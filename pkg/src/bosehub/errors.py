"""Exception hierarchy shared by all bosehub modules."""


class BosehubError(Exception):
    """Base class for every error raised by the package."""


class DomainError(BosehubError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(BosehubError, ValueError):
    """A requested Hilbert-space dimension exceeds the supported capacity."""


class ConvergenceError(BosehubError, RuntimeError):
    """An iterative eigensolver failed to reach its residual tolerance.

    Attributes
    ----------
    best_residual : float
        Smallest residual norm reached before giving up.
    iterations : int
        Number of restarts performed.
    """

    def __init__(self, message, best_residual=float("nan"), iterations=0):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class SingularityError(BosehubError, ArithmeticError):
    """A perturbative energy denominator vanishes (resonant disorder)."""


class DegeneracyError(BosehubError, ValueError):
    """The unperturbed state is degenerate, so the expansion is undefined."""


class RootError(BosehubError, ValueError):
    """No sign change of the target function was found in the bracket."""


class ConfigError(BosehubError, ValueError):
    """Invalid run configuration (unknown keys, bad values, parse errors)."""


class CellError(BosehubError, RuntimeError):
    """A grid cell failed; carries its coordinates and the underlying cause."""

    def __init__(self, message, tau=float("nan"), delta=float("nan"), cell=-1, realization=-1):
        super().__init__(message)
        self.tau = tau
        self.delta = delta
        self.cell = cell
        self.realization = realization

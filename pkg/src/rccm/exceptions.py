"""Error hierarchy for the RCCM toolkit."""

from typing import Any, Optional

import numpy as np


class RCCMError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidInputError(RCCMError, ValueError):
    """Input data violates a documented precondition."""


class DegenerateColumnError(InvalidInputError):
    """A constant column cannot be standardized."""

    def __init__(self, subject: int, column: int, name: Optional[str] = None):
        self.subject = subject
        self.column = column
        label = f"'{name}' " if name else ""
        super().__init__(
            f"Subject {subject} column {column} {label}is constant and cannot be scaled "
            "to unit standard deviation"
        )


class DomainError(RCCMError, ValueError):
    """Argument lies outside the domain of a density or special function."""


class InvalidTuningError(RCCMError, ValueError):
    """Tuning parameters violate the model constraints for a panel."""

    def __init__(self, message: str, subject: Optional[int] = None):
        self.subject = subject
        super().__init__(message)


class SolverConvergenceError(RCCMError):
    """A convex subproblem solver hit its iteration cap.

    The last iterate and its stationarity residual travel with the error so
    callers can decide whether the partial solution is usable.
    """

    def __init__(self, solver: str, iterate: np.ndarray, residual: float, iterations: int):
        self.solver = solver
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"{solver} did not converge after {iterations} iterations "
            f"(stationarity residual {residual:.3e})"
        )


class EmptyClusterError(RCCMError):
    """A cluster lost all responsibility mass."""

    def __init__(self, cluster: int, iteration: Optional[int] = None, mass: float = 0.0):
        self.cluster = cluster
        self.iteration = iteration
        self.mass = mass
        where = f" at EM iteration {iteration}" if iteration is not None else ""
        super().__init__(f"Cluster {cluster} is empty (responsibility mass {mass:.3e}){where}")


class NumericalError(RCCMError, ArithmeticError):
    """A computation produced no finite value where one is required."""


class IngestionError(RCCMError):
    """Subject data files could not be read into a panel."""

    def __init__(self, message: str, files: Optional[list] = None):
        self.files = list(files or [])
        super().__init__(message)


class ConfigurationError(RCCMError):
    """A configuration document failed validation."""

    def __init__(self, message: str, errors: Optional[list[dict[str, Any]]] = None):
        self.errors = list(errors or [])
        super().__init__(message)

    @property
    def offending_keys(self) -> list[str]:
        return [".".join(str(part) for part in err.get("loc", ())) for err in self.errors]

"""Exception hierarchy with machine-readable error codes."""

from typing import Any, Dict, Optional, Tuple


class SparseTuneError(Exception):
    """Base error; `code` is the string reported by the CLI."""

    code = "sparsetune_error"

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": str(self)}


class DomainError(SparseTuneError, ValueError):
    """An argument lies outside the domain of a mathematical operation."""

    code = "domain_error"


class ConfigurationError(SparseTuneError, ValueError):
    """Inconsistent or missing settings (fold layout, penalty arguments...)."""

    code = "configuration_error"


class DataError(SparseTuneError, ValueError):
    code = "malformed_csv"


class DimensionMismatchError(SparseTuneError, ValueError):
    code = "dimension_mismatch"


class UnsupportedSizeError(SparseTuneError, ValueError):
    """Exhaustive computation requested beyond its enumeration cap."""

    code = "unsupported_size"


class UnavailableEstimatorError(SparseTuneError, RuntimeError):
    code = "unavailable_estimator"


class DegenerateFitError(SparseTuneError, RuntimeError):
    """The residual scale collapsed (response interpolated by the active set)."""

    code = "degenerate_fit"


class ConvergenceError(SparseTuneError, RuntimeError):
    """An iterative solver stopped before its optimality certificate held."""

    code = "nonconvergence"

    def __init__(self, message: str, violation: float):
        super().__init__(message)
        self.violation = float(violation)

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["violation"] = self.violation
        return payload


class BracketError(SparseTuneError, RuntimeError):
    """Root bracketing failed; carries the last bracket tried."""

    code = "bracket_failure"

    def __init__(self, message: str, bracket: Tuple[float, float], residual: Optional[float] = None):
        super().__init__(message)
        self.bracket = (float(bracket[0]), float(bracket[1]))
        self.residual = residual

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["bracket"] = list(self.bracket)
        if self.residual is not None:
            payload["residual"] = float(self.residual)
        return payload

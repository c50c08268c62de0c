from __future__ import annotations

from typing import TYPE_CHECKING

from scripts.engine.internal.constant import ErrorKind

if TYPE_CHECKING:
    from typing import Any, Dict, Optional

__all__ = [
    "LabError",
    "InvalidGameError",
    "AlphabetMismatchError",
    "BudgetExceededError",
    "ZeroProbabilityError",
    "IndexOutOfRangeError",
    "UnsupportedGameError",
    "UnreachableBranchError",
    "LpInfeasibleError",
    "LpUnboundedError",
    "CertificateError",
    "UsageError",
]


class LabError(Exception):
    """
    Base for every error the lab raises on purpose. `kind` is machine readable, `path` points at the offending field
    of the input, e.g. "support[2].w".
    """

    kind = ErrorKind.INVALID_GAME

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.message = message
        self.path = path

    def to_record(self) -> Dict[str, Any]:
        return {"error": {"kind": self.kind, "path": self.path, "message": self.message}}


class InvalidGameError(LabError):
    kind = ErrorKind.INVALID_GAME


class AlphabetMismatchError(LabError):
    kind = ErrorKind.ALPHABET_MISMATCH


class BudgetExceededError(LabError):
    kind = ErrorKind.BUDGET_EXCEEDED


class ZeroProbabilityError(LabError):
    kind = ErrorKind.ZERO_PROBABILITY


class IndexOutOfRangeError(LabError):
    kind = ErrorKind.INDEX_OUT_OF_RANGE


class UnsupportedGameError(LabError):
    kind = ErrorKind.UNSUPPORTED_GAME


class UnreachableBranchError(LabError):
    kind = ErrorKind.UNREACHABLE_BRANCH


class LpInfeasibleError(LabError):
    """
    Raised when phase one ends with positive artificial mass. `certificate` holds the row multipliers y with
    y·A ≤ 0 and y·b > 0.
    """

    kind = ErrorKind.LP_INFEASIBLE

    def __init__(self, message: str, certificate: Optional[Any] = None, path: str = ""):
        super().__init__(message, path)
        self.certificate = certificate


class LpUnboundedError(LabError):
    """
    Raised when an entering column has no positive entry. `certificate` holds the improving ray.
    """

    kind = ErrorKind.LP_UNBOUNDED

    def __init__(self, message: str, certificate: Optional[Any] = None, path: str = ""):
        super().__init__(message, path)
        self.certificate = certificate


class CertificateError(LabError):
    kind = ErrorKind.CERTIFICATE_FAILED


class UsageError(LabError):
    kind = ErrorKind.USAGE

#!/usr/bin/env python3
"""
OpRange Errors
Exception hierarchy shared by every oprange module and the CLI
"""

from typing import Any, Dict, List, Optional


class OperatorRangeError(ValueError):
    """Base class for user-facing precondition failures (CLI exit 2)"""

    kind = "precondition"

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "type": type(self).__name__, "message": str(self)}


class DimensionMismatch(OperatorRangeError):
    kind = "dimension"


class ModeMismatch(OperatorRangeError):
    kind = "mode"


class ExactModeUnsupported(OperatorRangeError):
    kind = "mode"


class MatrixParseError(OperatorRangeError):
    kind = "parse"


class TowerConfigError(OperatorRangeError):
    kind = "parse"


class InputFileError(OperatorRangeError):
    """Missing or unreadable input file"""

    kind = "io"


class NotSymmetric(OperatorRangeError):
    pass


class NotPSD(OperatorRangeError):
    pass


class NotInvertible(OperatorRangeError):
    pass


class NotInRange(OperatorRangeError):
    pass


class RangesDiffer(OperatorRangeError):
    pass


class NotQNormalized(OperatorRangeError):
    pass


class NotNormalized(OperatorRangeError):
    pass


class NotAlmostDominated(OperatorRangeError):
    pass


class InvalidL(OperatorRangeError):
    """Rejected subspace for a Lebesgue-type decomposition"""

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["reason"] = self.reason
        return payload


class IncompatibleL(OperatorRangeError):
    pass


class NotAFactorization(OperatorRangeError):
    pass


class RelationsDiffer(OperatorRangeError):
    pass


class InternalConsistencyError(RuntimeError):
    """Base class for broken internal invariants (CLI exit 3)"""

    kind = "internal"

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "type": type(self).__name__, "message": str(self)}


class CriteriaDisagree(InternalConsistencyError):
    """Equivalent criteria returned different verdicts"""

    def __init__(self, message: str, trace: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.trace = trace or []

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["criteria_trace"] = self.trace
        return payload


class VerificationFailed(InternalConsistencyError):
    def __init__(self, message: str, failed: Optional[List[str]] = None):
        super().__init__(message)
        self.failed = failed or []

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["failed"] = self.failed
        return payload


class RouteDisagreement(InternalConsistencyError):
    pass

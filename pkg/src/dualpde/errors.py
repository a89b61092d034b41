"""Exception types shared by the package."""


class DualPDEError(Exception):
    pass


class DomainError(DualPDEError, ValueError):
    """Bad arithmetic input (division by zero, singular change, ...)."""


class ShapeError(DualPDEError, ValueError):
    pass


class OrderBudgetExceeded(DualPDEError):
    def __init__(self, msg, max_order=None):
        super().__init__(msg)
        self.max_order = max_order


class PreconditionFailed(DualPDEError):
    pass


class NotTorsionFree(DualPDEError):
    pass


class DegenerateMetric(DualPDEError, ValueError):
    pass


class ParseError(DualPDEError):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col
        self.msg = msg


class DeltaIrregularWarning(UserWarning):
    """Characters are not non-increasing: coordinates are probably not delta-regular."""

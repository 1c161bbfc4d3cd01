from typing import Any, List, Optional


class LabError(Exception):
    """Base class for every error raised by the verification lab."""


class OrderingError(LabError):
    """Spectral parameters or profile corners are not strictly interlacing."""


class IncommensurabilityError(LabError):
    def __init__(self, message: str, length: float, unit: float, index: Optional[int] = None):
        super().__init__(message)
        self.length = length
        self.unit = unit
        self.index = index


class SingularityError(LabError):
    def __init__(self, message: str, point: complex):
        super().__init__(message)
        self.point = point


class DomainError(LabError):
    """A scalar argument lies outside the domain of the operation."""


class InterlacingError(LabError):
    def __init__(self, message: str, index: int, gap: float):
        super().__init__(message)
        self.index = index
        self.gap = gap


class EvaluationError(LabError):
    def __init__(self, message: str, location: Any):
        super().__init__(message)
        self.location = location


class DegeneracyError(LabError):
    def __init__(self, message: str, candidates: List[Any]):
        super().__init__(message)
        self.candidates = candidates


class EigensolverError(LabError):
    pass

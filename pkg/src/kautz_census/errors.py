"""Exception hierarchy shared by every module.

CLI exit codes are attached to the classes so the front end can map any
failure without a lookup table.
"""

from __future__ import annotations


class KautzError(Exception):
    exit_code = 1


class DomainError(KautzError, ValueError):
    """Parameters outside the supported domain (d < 2, k > D, ...)."""

    exit_code = 2


class NotApplicable(DomainError):
    """A closed form was requested outside its range of validity."""


class CapExceeded(KautzError):
    """Enumeration would exceed the configured cap."""

    exit_code = 3

    def __init__(self, what: str, size: int, cap: int) -> None:
        super().__init__(
            f"{what} needs {size} items, above the enumeration cap {cap}; "
            "raise it with the KAUTZ_EDGE_CAP environment variable or --cap"
        )
        self.size = size
        self.cap = cap


class NegativeResult(KautzError):
    """A recursion step produced a negative count (inconsistent input)."""


class ConsistencyError(KautzError):
    """Two routes produced different values for the same cell."""

    def __init__(self, message: str, candidates: dict[str, int] | None = None) -> None:
        super().__init__(message)
        self.candidates = dict(candidates or {})


class MissingCalibration(KautzError):
    exit_code = 4


class MissingMasks(DomainError):
    """No boundary masks are known for this alphabet size."""


class CalibrationError(KautzError):
    exit_code = 5

    def __init__(self, message: str, report: dict) -> None:
        super().__init__(message)
        self.report = report


class NoMatch(CalibrationError):
    pass


class Ambiguous(CalibrationError):
    pass


class NoFit(KautzError):
    def __init__(self, message: str, report: dict) -> None:
        super().__init__(message)
        self.report = report

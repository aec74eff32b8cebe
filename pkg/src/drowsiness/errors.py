"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures without a
lookup table: 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations


class DrowsinessError(Exception):
    exit_code = 3

    def record(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "exit_code": self.exit_code}


class DataError(DrowsinessError):
    exit_code = 2


class UsageError(DrowsinessError):
    exit_code = 1


# ingest
class MissingColumn(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row


class TruncatedRecord(DataError):
    def __init__(self, offset: int, reason: str = "truncated record"):
        super().__init__(f"{reason} at byte offset {offset}")
        self.offset = offset


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class UnparseablePath(DataError):
    def __init__(self, path: str, reason: str = "path does not match layout pattern"):
        super().__init__(f"{reason}: {path}")
        self.path = path


class DuplicateRecording(DataError):
    pass


# sampling
class InvalidCount(UsageError):
    pass


class InsufficientFrames(DataError):
    pass


# attention metrics
class SeriesTooShort(DataError):
    pass


class InvalidScale(DataError):
    pass


class EmptyTrack(DataError):
    pass


# features
class MissingHog(DataError):
    pass


class EmptyWindow(DataError):
    pass


class DimMismatch(DataError):
    pass


# classify
class SingleClassData(DataError):
    pass


class NoConvergence(DrowsinessError):
    """Raised only on request; by default a non-converged model is returned flagged."""


# eval
class UnknownLabel(DataError):
    pass


class EmptyMatrix(DataError):
    pass


class FormatError(DataError):
    pass

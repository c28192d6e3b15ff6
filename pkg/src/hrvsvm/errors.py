"""Exception hierarchy shared by the ingest, metric, solver and pipeline layers."""

from __future__ import annotations


class HrvSvmError(Exception):
    """Base class for every error raised by this package."""


class InputError(HrvSvmError, ValueError):
    """Bad input data. ``line`` is the 1-based line of the offending row when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(InputError):
    pass


class HeaderError(InputError):
    pass


class DomainError(InputError):
    pass


class EmptySeriesError(InputError):
    pass


class MonotonicityError(InputError):
    pass


class RangeError(InputError):
    pass


class DuplicateIdError(InputError):
    pass


class DimensionError(HrvSvmError, ValueError):
    pass


class SingleClassError(HrvSvmError, ValueError):
    def __init__(self, message: str = "need both classes (+1 and -1) to train"):
        super().__init__(message)


class ConflictingLabelsError(HrvSvmError, ValueError):
    pass


class UnsupportedKernelError(HrvSvmError, ValueError):
    pass


class ConstantFeatureError(HrvSvmError, ValueError):
    pass


class ModelFormatError(HrvSvmError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VersionError(ModelFormatError):
    pass


class TaskMismatchError(HrvSvmError, ValueError):
    pass

# errors.py
"""Exception hierarchy.

Everything raised on purpose derives from `MiciError`, so the CLI can map
"data problem" to exit 1 with a single except clause.
"""

from __future__ import annotations


class MiciError(Exception):
    """Base class for all library errors."""


class ConfigError(MiciError, ValueError):
    pass


# ───────────────────────
# measures
# ───────────────────────
class MeasureError(MiciError, ValueError):
    pass


class NormalizationError(MeasureError):
    pass


class MonotonicityError(MeasureError):
    def __init__(self, subset: int, superset: int, lower: float, upper: float):
        self.subset = subset
        self.superset = superset
        super().__init__(
            f"monotonicity violated: g({subset:#b})={lower!r} > g({superset:#b})={upper!r}"
        )


class RangeError(MeasureError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FullSetError(MeasureError):
    pass


class DimensionMismatch(MiciError, ValueError):
    pass


# ───────────────────────
# objectives / labels
# ───────────────────────
class NonBinaryLabel(MiciError, ValueError):
    pass


class LabelOutOfRange(MiciError, ValueError):
    pass


class InvalidExponent(MiciError, ValueError):
    pass


class InvalidVariance(MiciError, ValueError):
    pass


# ───────────────────────
# optimizer
# ───────────────────────
class InvalidStd(MiciError, ValueError):
    pass


class SizeMismatch(MiciError, ValueError):
    pass


class EmptyBagSet(MiciError, ValueError):
    pass


# ───────────────────────
# datagen / eval
# ───────────────────────
class InvalidSweep(MiciError, ValueError):
    pass


class InsufficientBackground(MiciError, ValueError):
    pass


class DegenerateRange(MiciError, ValueError):
    pass


class DomainError(MiciError, ValueError):
    pass


class LengthMismatch(MiciError, ValueError):
    pass


class SingleClass(MiciError, ValueError):
    pass


# ───────────────────────
# files
# ───────────────────────
class ParseError(MiciError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RaggedWidth(ParseError):
    pass


class InconsistentLabel(MiciError, ValueError):
    def __init__(self, bag_id: str, first: float, other: float, line: int):
        self.bag_id = bag_id
        self.line = line
        super().__init__(
            f"line {line}: bag {bag_id!r} labelled {other!r}, earlier rows say {first!r}"
        )


class SchemaError(MiciError, ValueError):
    pass

"""Exception types shared across the toolkit."""


class ShlError(Exception):
    """Base class for all toolkit errors."""


class InvalidDistributionError(ShlError):
    """Categorical weights are empty, negative, or sum to zero."""


class InsufficientSampleError(ShlError):
    """Sample too small for the requested statistic."""


class DegenerateSequenceError(ShlError):
    """Sequence has no variation (or one dichotomized group is empty)."""


class DegenerateTableError(ShlError):
    """Contingency table has fewer than two usable rows or columns."""


class InconsistentCountsError(ShlError):
    """Count records disagree on trials or do not cover all settings."""


class CsvFormatError(ShlError):
    """Malformed CSV input; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line

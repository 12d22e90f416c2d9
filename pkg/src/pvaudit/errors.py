"""Exception types raised across the audit toolkit."""


class AuditError(ValueError):
    """Base class for all toolkit errors."""


class InvalidArgumentError(AuditError):
    pass


class DegenerateIntervalError(AuditError):
    pass


class RatioDomainError(AuditError):
    pass


class InsufficientDataError(AuditError):
    pass


class EmptyInputError(AuditError):
    pass


class SearchSpaceOverflowError(AuditError, OverflowError):
    pass


class IndeterminateFormError(AuditError, ZeroDivisionError):
    pass


class SchemaError(AuditError):
    """CSV header does not match the expected schema."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class RowError(AuditError):
    """A data row failed to parse or validate. ``row`` is 1-based, header excluded."""

    def __init__(self, row, message):
        super().__init__(f"row {row}: {message}")
        self.row = row
        self.reason = message

# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt


class ValidationError(Exception):
    """Bad input or a refused request. The CLI exits with status 1."""

    exit_code = 1


class DomainError(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class DuplicateEntryError(ValidationError):
    pass


class InvariantError(ValidationError):
    pass


class DegenerateNetworkError(ValidationError):
    pass


class LimitExceededError(ValidationError):
    pass


class ModeError(ValidationError):
    pass


class DecodingError(ValidationError):
    pass


class DecodingBudgetError(DecodingError):
    pass


class BoundViolationError(Exception):
    """A measured quantity broke a proven bound. The CLI exits with status 2."""

    exit_code = 2

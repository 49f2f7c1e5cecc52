"""Exception types shared across the package."""


class SparseBnbError(Exception):
    """Base class for all package errors."""


class ConfigError(SparseBnbError):
    """Invalid constructor parameters or solver options."""


class DomainError(SparseBnbError):
    """Evaluation requested outside the domain of a function."""


class DimensionError(SparseBnbError):
    """Operand shapes do not match the problem data."""


class NumericalError(SparseBnbError):
    """Non-finite intermediate state detected during a solve."""


class BranchError(SparseBnbError):
    """Branching requested on a node with no free coordinate."""


class SizeError(SparseBnbError):
    """Problem too large for exhaustive enumeration."""


class DegenerateError(SparseBnbError):
    """No meaningful regularization level exists for the given data."""

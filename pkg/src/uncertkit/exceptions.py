"""Exception hierarchy shared by the library and the command line."""


class UncertkitError(Exception):
    """Base class for all errors raised by uncertkit."""


class DomainError(UncertkitError, ValueError):
    """An argument lies outside the domain of the operation."""


class InputError(UncertkitError, ValueError):
    """Malformed or unreadable external input (CSV, JSON, config)."""


class NumericFailure(UncertkitError, ArithmeticError):
    """A numerical routine failed (no convergence, singular matrix, non-finite values)."""

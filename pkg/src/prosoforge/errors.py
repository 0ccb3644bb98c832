"""Exception hierarchy shared by every module."""


class ProsoforgeError(Exception):
    """Base class for all errors raised by the toolkit."""


class ValidationError(ProsoforgeError, ValueError):
    """An argument or configuration violates a documented constraint."""


class FormatError(ProsoforgeError):
    """A file is truncated, malformed, or carries the wrong magic."""


class UnsupportedFormatError(FormatError):
    """A well-formed file uses an encoding this toolkit does not read."""


class ComputationError(ProsoforgeError, ArithmeticError):
    """A numerical stage produced a result that cannot be used."""

"""Exception hierarchy shared by every edfvae module."""


class EdfVaeError(Exception):
    """Base class for all edfvae errors."""


class DomainError(EdfVaeError, ValueError):
    """An argument lies outside the domain of the operation."""


class DataFormatError(DomainError):
    """A data file could not be parsed."""


class ConfigError(EdfVaeError, ValueError):
    """An experiment configuration is invalid or incomplete."""


class SolverPreconditionError(EdfVaeError, ValueError):
    """A closed-form solver was called outside its region of validity."""


class NumericalError(EdfVaeError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""

    def __init__(self, message: str, batch_index: int | None = None):
        super().__init__(message)
        self.batch_index = batch_index

"""
General utilities for the nomlog interpreter: the exception hierarchy,
source locations and standardized error reporting.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import logging

logger = logging.getLogger(__name__)


class NomlogError(Exception):
    """Base class for all interpreter errors."""


class NameTypeError(NomlogError):
    """Two names of different name-types were swapped or compared."""


class NonGroundError(NomlogError):
    """A ground-only operation received a term containing variables."""


class LoadError(NomlogError):
    """
    An error tied to a position in a program or query text.

    Args:
        message (str): What went wrong
        filename (str, optional): Source file name, "<input>" when unknown
        line (int, optional): 1-based line number
        column (int, optional): 1-based column number
    """

    def __init__(self, message, filename=None, line=None, column=None):
        super().__init__(message)
        self.message = message
        self.filename = filename or "<input>"
        self.line = line
        self.column = column

    def __str__(self):
        return format_location(self.filename, self.line, self.column, self.message)


class ParseError(LoadError):
    """Lexical or syntax error."""


class TypeCheckError(LoadError):
    """
    One or more kind/type errors. The first error provides the location;
    all of them are kept in `errors`.
    """

    def __init__(self, errors):
        first = errors[0]
        super().__init__(first.message, first.filename, first.line, first.column)
        self.errors = list(errors)

    def __str__(self):
        return "\n".join(
            format_location(e.filename, e.line, e.column, e.message) for e in self.errors
        )


class FlatteningError(NomlogError):
    """A defined function symbol survived flattening (internal error)."""


class DepthLimitExceeded(NomlogError):
    """Proof search cut at least one branch at the depth limit."""

    def __init__(self, limit):
        super().__init__(f"depth limit of {limit} transitions exceeded")
        self.limit = limit


class UniverseExhausted(NomlogError):
    """The finite ground universe cannot supply a required term or name."""


class NonConvergence(NomlogError):
    """Fixpoint iteration did not stabilize within the iteration budget."""


def format_location(filename, line, column, message):
    """
    Format a message as `file:line:col: message`.

    Args:
        filename (str): Source file name
        line (int or None): Line number
        column (int or None): Column number
        message (str): The message text

    Returns:
        str: The formatted message
    """
    return f"{filename}:{line if line is not None else 0}:{column if column is not None else 0}: {message}"


def handle_error(operation, error):
    """
    Standardized error handling.

    Args:
        operation (str): Description of the operation that failed
        error (Exception or str): The error that occurred

    Returns:
        str: The logged message, for echoing to the user
    """
    error_msg = f"Error {operation}: {str(error)}"
    logger.error(error_msg)
    return error_msg

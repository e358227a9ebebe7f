"""Exception hierarchy shared by the library and the command line harness."""

from __future__ import annotations


class QCausetError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class UsageError(QCausetError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(QCausetError, ValueError):
    """A configuration file or constant table is malformed or incomplete."""


class ResourceLimitError(QCausetError, RuntimeError):
    """A request exceeds the configured cardinality or qubit budget."""

    exit_code = 2


class VerificationError(QCausetError, AssertionError):
    """A numerical self-check (reversibility, encoding, enumeration) failed."""

    exit_code = 3

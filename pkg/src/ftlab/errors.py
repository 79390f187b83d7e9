"""Exception types shared across the package, mapped to CLI exit codes."""


class FtlabError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(FtlabError):
    """Invalid configuration: unknown keys, bad values, missing files."""

    exit_code = 2


class NumericalError(FtlabError):
    """Numerical failure: non-finite inputs, failed convergence, empty brackets."""

    exit_code = 3


class IntegrityError(FtlabError):
    """Output integrity failure: checksum or summary mismatch."""

    exit_code = 4

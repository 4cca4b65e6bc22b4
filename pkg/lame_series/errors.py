"""
Error taxonomy for lame_series.

Every error derives from LameError and from the closest builtin, so
callers can catch either ``LameError`` or e.g. ``ValueError``.

The CLI maps these onto exit codes:
    2  config / params / spec errors
    3  domain violation (x outside the convergence domain, branch error)
    4  tolerance exceeded (compare, kernel-check)
"""

from __future__ import annotations


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_TOLERANCE = 4

# Hard cap on any recurrence or summation index.
INDEX_CAP = 10**6


class LameError(Exception):
    """Base class for all lame_series errors."""
    exit_code = EXIT_CONFIG


class InvalidParamsError(LameError, ValueError):
    """a = b, a = c, a non-finite field, or an unsupported indicial root."""


class BranchError(LameError, ValueError):
    """Second-kind solution requested where z = x - a < 0."""
    exit_code = EXIT_DOMAIN


class SingularPointError(LameError, ValueError):
    """ODE residual requested at one of the singular points a, b, c."""
    exit_code = EXIT_DOMAIN


class TruncationOverflowError(LameError, OverflowError):
    """An index went past INDEX_CAP."""


class TerminationViolationError(LameError, ValueError):
    """B(2*beta_i + i + 1) != 0 for a polynomial-mode level."""


class SpecViolationError(LameError, ValueError):
    """Inconsistent polynomial spec or run configuration."""


class DivergenceError(LameError, ArithmeticError):
    """A limit or kernel series was requested outside its convergence region."""
    exit_code = EXIT_DOMAIN


class DomainError(LameError, ValueError):
    """x outside the convergence domain, or a special-function argument outside its own."""
    exit_code = EXIT_DOMAIN


class DivergenceWarning(RuntimeWarning):
    """A series was summed where it is not known to converge."""


def check_index(n: int, what: str = "index") -> int:
    """Raise TruncationOverflowError if n exceeds INDEX_CAP."""
    if n > INDEX_CAP:
        raise TruncationOverflowError(f"{what}={n} exceeds cap {INDEX_CAP}")
    return n

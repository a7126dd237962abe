"""
common/errors.py
----------------

Exception types raised across the toolkit.

Inputs that break a precondition raise subclasses of ``ValueError``; numerical
certificates that cannot be met raise subclasses of ``RuntimeError``. The CLI
maps the two families onto exit codes 2 and 3 respectively. Failed inequality
checks are *not* exceptions: they are reported as data.
"""


class DomainError(ValueError):
    """An argument lies outside the domain where the formula is defined."""


class UnsupportedPatternError(ValueError):
    """A correlator pattern cannot be evaluated (malformed, odd length, > 4 ops)."""


class RegimeMismatchError(ValueError):
    """A prediction was requested for a regime the spectrum was not built for."""


class AccuracyError(RuntimeError):
    """A tail, quadrature or truncation certificate exceeds its tolerance."""


class TruncationError(AccuracyError):
    """A Fock-space cutoff is too small for the requested state."""


class ConvergenceError(RuntimeError):
    """A bracketed root solve did not converge (monotone equations: internal)."""


class ResourceError(RuntimeError):
    """An enumeration or matrix would exceed a configured size limit."""

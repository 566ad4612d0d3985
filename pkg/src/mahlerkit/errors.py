"""Exception types shared by all modules.

Every error raised on purpose by the library derives from ``MahlerkitError``,
so callers (and the CLI) can map failure classes to exit codes.
"""

from __future__ import annotations


class MahlerkitError(Exception):
    """Base class for library errors."""


class InputError(MahlerkitError, ValueError):
    """Ill-formed arguments or input files."""


class PreconditionError(MahlerkitError, ValueError):
    """An operation was called outside its documented domain."""


class BudgetError(MahlerkitError):
    """A truncated series is too short for the requested computation."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class ConsistencyError(MahlerkitError):
    """Supplied data contradicts an equation (e.g. a bad seed)."""

    def __init__(self, message: str, order: int | None = None):
        super().__init__(message)
        self.order = order


class DomainError(MahlerkitError, ValueError):
    """Evaluation point outside the region of convergence."""


class SingularityError(MahlerkitError):
    """A matrix expected to be invertible is singular."""


class RankError(MahlerkitError):
    """Rows expected to be independent are dependent.

    ``certificate`` holds a nonzero polynomial row vector annihilating them.
    """

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class UnimodularityError(MahlerkitError):
    """A matrix expected to be unimodular has a non-unit diagonal gcd."""

    def __init__(self, message: str, gcd=None):
        super().__init__(message)
        self.gcd = gcd


class HypothesisError(MahlerkitError):
    """A numeric hypothesis of a bound (such as the range of rho) fails."""


class PrecisionError(MahlerkitError):
    """An interval comparison stayed undecidable at the maximum precision."""


class DegenerateInputError(MahlerkitError):
    """The input is degenerate, e.g. the series looks like a polynomial."""


class Defect(MahlerkitError, AssertionError):
    """Internal inconsistency: a proven identity failed to hold."""

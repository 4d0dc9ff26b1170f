"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to
distinct process exit statuses without a lookup table.
"""

from __future__ import annotations


class BurstyError(Exception):
    exit_code = 1


class MalformedInput(BurstyError):
    exit_code = 2

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


class AllDocumentsEmpty(BurstyError):
    exit_code = 6


class ComplementAbsent(BurstyError):
    """A document consists only of the target term."""

    exit_code = 7

    def __init__(self, doc: int, term: int | None = None):
        super().__init__(f"document {doc} contains only the target term {term}")
        self.doc = doc
        self.term = term


class DomainError(BurstyError, ValueError):
    exit_code = 8


class InvalidPenalty(BurstyError, ValueError):
    exit_code = 9


class PrecisionNonPositive(BurstyError):
    """Closed-form precision estimate is not positive (eta^2 <= r_i)."""

    exit_code = 4

    def __init__(self, term: int | str | None, eta2: float, r: int):
        super().__init__(
            f"term {term!r}: eta^2 = {eta2:g} <= r = {r}; precision estimate not positive"
        )
        self.term = term
        self.eta2 = eta2
        self.r = r


class GuardViolated(BurstyError):
    """The Stirling-expanded statistic needs eta^2 > r_i."""

    exit_code = 3

    def __init__(self, term: int | str | None, eta2: float, r: int):
        super().__init__(
            f"term {term!r}: eta^2 = {eta2:g} <= r = {r}; "
            "use plr_reference or the clamped per-document weights instead"
        )
        self.term = term
        self.eta2 = eta2
        self.r = r


class DegenerateNull(BurstyError):
    exit_code = 5


class SingleClass(BurstyError):
    exit_code = 10


class NotConverged(BurstyError):
    exit_code = 11

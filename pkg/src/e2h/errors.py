"""Exception types shared across the package.

Every error raised on a caller-facing contract derives from E2HError, so a
pipeline can catch one base class.  Loaders and validators attach enough
context (line numbers, offending values, ids) to make the failure
actionable without re-reading the input.
"""

from __future__ import annotations


class E2HError(Exception):
    """Base class for all package errors."""


# --- input validation -------------------------------------------------------

class ValidationError(E2HError):
    """Malformed or contract-violating input data."""


class MalformedRow(ValidationError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class DuplicateResponse(ValidationError):
    def __init__(self, key: tuple):
        super().__init__(f"duplicate response for {key!r}")
        self.key = key


class NonBinaryOutcome(ValidationError):
    def __init__(self, value):
        super().__init__(f"outcome must be 0 or 1, got {value!r}")
        self.value = value


class OutOfRangeProportion(ValidationError):
    def __init__(self, value):
        super().__init__(f"p_correct must lie in [0, 1], got {value!r}")
        self.value = value


class NonPositiveCount(ValidationError):
    def __init__(self, value):
        super().__init__(f"n_attempts must be a positive integer, got {value!r}")
        self.value = value


class InvalidScore(ValidationError):
    def __init__(self, value):
        super().__init__(f"score must be 0, 0.5 or 1, got {value!r}")
        self.value = value


class NonPositiveRd(ValidationError):
    def __init__(self, value):
        super().__init__(f"rating deviation must be positive, got {value!r}")
        self.value = value


class InvalidParameter(ValidationError):
    """A numeric argument violates an operation's precondition."""


class ShapeMismatch(ValidationError):
    """Parameter vectors do not match the data dimensions."""


class UnknownItem(ValidationError):
    def __init__(self, item_id: str):
        super().__init__(f"unknown item {item_id!r}")
        self.item_id = item_id


class LengthMismatch(ValidationError):
    """Paired vectors have different lengths."""


class NonMonotonePeriods(ValidationError):
    def __init__(self, problem_id: str):
        super().__init__(f"periods for problem {problem_id!r} are not non-decreasing")
        self.problem_id = problem_id


class TooFewItems(ValidationError):
    """Not enough items to form the requested bins."""


class TooManyNodes(ValidationError):
    """Interpolation node count exceeds the supported cap."""


class EmptyPeriod(ValidationError):
    """A rating update was requested with no games in the period."""


class EmptyLog(ValidationError):
    """An evaluation log holds no records."""


class EmptyLogs(ValidationError):
    """No evaluation logs were supplied."""


class ProportionAtAsymptote(ValidationError):
    """p_correct is at or beyond the response function's asymptote."""

    def __init__(self, item_id: str, p: float, c: float):
        super().__init__(
            f"item {item_id!r}: p_correct={p} is outside the invertible range "
            f"for guessing floor c={c}"
        )
        self.item_id = item_id
        self.p = p
        self.c = c


# --- statistical degeneracy --------------------------------------------------

class DegeneracyError(E2HError):
    """The statistic is undefined on this input."""


class DegenerateRange(DegeneracyError):
    """All raw values are identical; no normalization possible."""


class ZeroVariance(DegeneracyError):
    """A rank vector is constant; correlation undefined."""


class AllPairsExcluded(DegeneracyError):
    """Every pair fell to an exclusion rule; no statistics to report."""


# --- numerical solvability ----------------------------------------------------

class SolvabilityError(E2HError):
    """A numerical solve could not be carried out."""


class SolverFailed(SolvabilityError):
    """Root bracketing or iteration failed to converge."""


class SingularSystem(SolvabilityError):
    """The interpolation system is singular (duplicate or degenerate nodes)."""


class ChainDiverged(SolvabilityError):
    """MCMC acceptance rate collapsed; samples are unusable."""


# --- convergence ---------------------------------------------------------------

class DidNotConverge(E2HError):
    """Optimization stopped before reaching tolerance.

    Carries the best fit found so far in ``fit``.
    """

    def __init__(self, message: str, fit=None):
        super().__init__(message)
        self.fit = fit

"""Semantic exception hierarchy.

Every error raised by the library derives from :class:`GradestError`, so
callers (and the CLI) can separate usage problems from numerical failures.
"""


class GradestError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(GradestError, ValueError):
    """A constructor argument is out of its admissible range."""


class DomainError(GradestError, ValueError):
    """Evaluation requested outside a function's or bound's validity domain."""


class QuadratureNonConvergenceError(GradestError, ArithmeticError):
    """Endpoint refinement exhausted without the partial sums settling.

    For integrands with a power endpoint behavior this signals a
    non-integrable singularity (exponent <= -1).
    """


class DerivativeUnavailableError(GradestError, ValueError):
    """A derivative was requested where no stencil fits the domain."""


class HypothesisMismatchError(GradestError, ValueError):
    """Model data does not satisfy the curvature/dimension hypotheses of a bound."""


class BracketError(GradestError, ValueError):
    """Root bracket contains no sign change, or more than one."""


class SolverError(GradestError, ArithmeticError):
    """Time march or ODE integration failed (positivity loss, step underflow)."""


class ConditionCheckError(GradestError, ValueError):
    """A hypothesis-suite precondition failed (missing function, bad grid point)."""


class TableFormatError(GradestError, ValueError):
    """A coefficient table or solution file does not match the documented schema."""

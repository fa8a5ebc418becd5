"""Ambient problem data and point samples of a gradient bound.

An estimate lives on a manifold of dimension ``n`` with Ricci curvature
bounded below by ``-k`` and is asserted for times in ``(0, T]``.  A
:class:`BoundSample` is one evaluated point of a bound, carrying both the
beta-form pair ``(beta, psi)`` and the equivalent alpha-form pair
``(alpha, phi) = (1/beta, psi/beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError

__all__ = ["EstimateContext", "BoundSample"]


@dataclass(frozen=True)
class EstimateContext:
    """Dimension, Ricci lower-bound constant, and time horizon.

    Units: ``k`` has units 1/time, ``T`` time, ``n`` is dimensionless.
    """

    n: int
    k: float
    T: float

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise InvalidParameterError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if not (math.isfinite(self.k) and self.k >= 0.0):
            raise InvalidParameterError(f"Ricci constant k must be finite and >= 0, got {self.k!r}")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise InvalidParameterError(f"horizon T must be finite and > 0, got {self.T!r}")

    def require_positive_k(self, what: str) -> None:
        """Reject k == 0 for families whose formulas divide by k."""
        if self.k <= 0.0:
            raise InvalidParameterError(f"{what} requires k > 0 (got k={self.k})")


@dataclass(frozen=True)
class BoundSample:
    """One evaluation of a gradient bound at time ``t``.

    ``alpha`` and ``phi`` are derived, so ``alpha * beta == 1`` and
    ``phi == psi * alpha`` hold exactly.
    """

    t: float
    beta: float
    psi: float

    @property
    def alpha(self) -> float:
        return 1.0 / self.beta

    @property
    def phi(self) -> float:
        return self.psi / self.beta

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "beta": self.beta,
            "psi": self.psi,
            "alpha": self.alpha,
            "phi": self.phi,
        }

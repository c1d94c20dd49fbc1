"""Result types shared by the canonical-height estimators."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from heightlab.numlin.balls import BallReal

EXACT_LATTICE = "exact_lattice"
TELESCOPED = "telescoped_certified"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class CanonicalEstimate:
    """Enclosures of the upper and lower canonical heights of one point."""

    limsup_est: BallReal
    liminf_est: BallReal
    mode: str
    error_bound: BallReal | None = None
    limsup_exact: Fraction | None = None
    liminf_exact: Fraction | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.liminf_est.certainly_gt(self.limsup_est):
            raise ValueError("lower estimate exceeds upper estimate")
        if self.mode == TELESCOPED and self.error_bound is None:
            raise ValueError("a certified telescoped estimate needs an error bound")

    @property
    def value(self) -> BallReal:
        """Hull of both estimates; the canonical height when they coincide."""
        return BallReal.hull([self.liminf_est, self.limsup_est])

    @property
    def is_exact(self) -> bool:
        return self.limsup_exact is not None and self.liminf_exact is not None

"""Contract binding multi-fidelity test objectives to the optimizer."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..dgp import FidelityLevel
from ..errors import DomainError
from ..space import DesignSpace


class MultiFidelityObjective(ABC):
    """A black box evaluable at any rung of a discrete fidelity ladder.

    Implementations must be deterministic given (x, level, objective seed)
    and report a strictly positive evaluation cost.
    """

    dimension: int
    ladder: tuple
    space: DesignSpace

    @abstractmethod
    def evaluate(self, x, level) -> tuple[float, float]:
        """Return (value, cost) for the design point x at the given level."""

    def known_optimum(self):
        """(x*, f*) when the true optimum is known, else None."""
        return None

    def resolve_level(self, level) -> FidelityLevel:
        idx = level.index if isinstance(level, FidelityLevel) else int(level)
        for lv in self.ladder:
            if lv.index == idx:
                return lv
        raise DomainError(f"level {idx} not on this objective's ladder")

    def check_point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if x.shape != (self.dimension,):
            raise DomainError(f"expected a {self.dimension}-vector, got shape {x.shape}")
        if not self.space.contains(x):
            raise DomainError(
                f"x={x.tolist()} outside design box "
                f"[{self.space.lower.tolist()}, {self.space.upper.tolist()}]"
            )
        return x

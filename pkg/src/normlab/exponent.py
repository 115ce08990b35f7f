from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class LebesgueExponent:
    """An exponent 1 < p < inf together with its conjugate p' = p / (p - 1)."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not (math.isfinite(p) and p > 1.0):
            raise DomainError(f"the Lebesgue exponent must satisfy 1 < p < inf, got p={self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def inv(self) -> float:
        return 1.0 / self.p

    @property
    def inv_conj(self) -> float:
        # 1 - 1/p rather than 1/p' keeps 1/p + 1/p' = 1 exact to rounding
        return 1.0 - 1.0 / self.p

    @classmethod
    def coerce(cls, p: float | LebesgueExponent) -> LebesgueExponent:
        return p if isinstance(p, cls) else cls(p)

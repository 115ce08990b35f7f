"""Gamma, Beta and sphere-area primitives.

The Gamma function is delegated to :mod:`math` (correctly rounded to a few ulp
on the positive axis); this module adds the domain/range contract and the
overflow-safe Beta function on top.
"""

from __future__ import annotations

import math

from .errors import DomainError, RangeError

# Largest x with Gamma(x) finite in double precision.
GAMMA_MAX_ARG = 171.6243769563027


def _positive(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} must be a finite positive real, got {x!r}")
    return x


def gamma(x: float) -> float:
    """Gamma function for x > 0.

    Raises DomainError for x <= 0 and RangeError once Gamma(x) overflows
    (x above ~171.62).
    """
    x = _positive(x)
    if x > GAMMA_MAX_ARG:
        raise RangeError(f"gamma({x!r}) overflows double precision")
    try:
        return math.gamma(x)
    except OverflowError as exc:  # pragma: no cover - guarded above
        raise RangeError(f"gamma({x!r}) overflows double precision") from exc


def lgamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0; finite for every finite x."""
    return math.lgamma(_positive(x))


def beta(a: float, b: float) -> float:
    """Euler Beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    a = _positive(a, "a")
    b = _positive(b, "b")
    # sort so that B(a, b) and B(b, a) take the identical floating-point path
    lo, hi = (a, b) if a <= b else (b, a)
    if lo + hi <= 170.0:
        return math.gamma(lo) * math.gamma(hi) / math.gamma(lo + hi)
    log_b = math.lgamma(lo) + math.lgamma(hi) - math.lgamma(lo + hi)
    if log_b > 709.78:
        raise RangeError(f"beta({a!r}, {b!r}) overflows double precision")
    return math.exp(log_b)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n.

    ``sphere_area(1) == 2``: the 0-sphere {-1, +1} with counting measure.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    n = int(n)
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)

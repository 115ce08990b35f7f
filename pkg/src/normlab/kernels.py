"""Homogeneous, rotation-invariant product kernels.

A factor kernel on R^n is stored through its radial-angular profile
``kappa(s, r, c)``: the value K(x, y) when |x| = s, |y| = r and the cosine of
the angle between x and y is c. Rotation invariance holds by construction;
homogeneity of degree -n is checked statistically by :func:`check_homogeneity`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EvaluationError, UsageError
from .expr import Profile, parse_profile

HOMOGENEITY_TOL = 1e-10

KERNEL_TYPES = ("hilbert", "hardy", "custom")


@dataclass(frozen=True)
class FactorKernel:
    """One factor K(x_i, y_i) acting on R^n.

    Attributes:
        n: dimension of the factor space.
        profile: vectorized callable ``(s, r, c) -> kappa``.
        name: label used in reports.
        diagonal_singular: kappa(1, r, c) blows up as (r, c) -> (1, 1).
        uses_angle: False when kappa ignores c (sphere averages become a
            multiplication by the sphere area).
        breakpoints: radii r > 0 where kappa(1, r, .) is not smooth; the
            half-line quadrature splits there.
        family: "hilbert", "hardy" or None for user-defined profiles.
        expression: source text for parsed profiles.
        scale: constant multiplier applied on top of ``profile``.
    """

    n: int
    profile: Callable = field(repr=False, compare=False)
    name: str = "custom"
    diagonal_singular: bool = False
    uses_angle: bool = True
    breakpoints: tuple[float, ...] = (1.0,)
    family: str | None = None
    expression: str | None = None
    scale: float = 1.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"factor dimension must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        bps = tuple(sorted({float(b) for b in self.breakpoints}))
        if any(not (b > 0 and math.isfinite(b)) for b in bps):
            raise DomainError(f"breakpoints must be finite positive radii, got {bps}")
        object.__setattr__(self, "breakpoints", bps)
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise DomainError(f"kernel scale must be finite and nonnegative, got {self.scale!r}")

    def evaluate(self, s, r, c, *, check: bool = True) -> np.ndarray:
        """kappa(s, r, c) broadcast to a float array.

        With ``check`` (default) NaN or negative values raise EvaluationError;
        +inf is passed through so that quadrature can diagnose divergence.
        """
        s = np.asarray(s, dtype=float)
        r = np.asarray(r, dtype=float)
        c = np.asarray(c, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            raw = self.profile(s, r, c)
            out = np.broadcast_to(np.asarray(raw, dtype=float), np.broadcast(s, r, c).shape)
            if self.scale != 1.0:
                out = out * self.scale
        if check:
            if np.isnan(out).any():
                raise EvaluationError(f"kernel {self.name!r} produced NaN")
            if (out < 0).any():
                raise EvaluationError(f"kernel {self.name!r} produced a negative value")
        return out

    def scaled(self, factor: float) -> FactorKernel:
        """The kernel ``factor * K``."""
        return replace(self, scale=self.scale * float(factor), name=f"{factor:g}*{self.name}")

    def to_spec(self) -> dict:
        """Entry for the kernel JSON file format."""
        if self.scale != 1.0:
            raise UsageError("scaled kernels have no JSON representation")
        if self.family in ("hilbert", "hardy"):
            return {"n": self.n, "type": self.family}
        if self.expression is None:
            raise UsageError(f"kernel {self.name!r} was built from a Python callable; no JSON form")
        out = {"n": self.n, "type": "custom", "profile": self.expression, "name": self.name}
        if self.diagonal_singular:
            out["diagonal_singular"] = True
        if self.breakpoints != (1.0,):
            out["breakpoints"] = list(self.breakpoints)
        return out


@dataclass(frozen=True)
class ProductKernel:
    """K(x_1, y_1) ... K(x_m, y_m) acting on R^{n_1} x ... x R^{n_m}."""

    factors: tuple[FactorKernel, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise UsageError("a product kernel needs at least one factor")
        if not all(isinstance(f, FactorKernel) for f in factors):
            raise UsageError("product kernel factors must be FactorKernel instances")
        object.__setattr__(self, "factors", factors)

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.n for f in self.factors)

    def to_spec(self) -> dict:
        return {"factors": [f.to_spec() for f in self.factors]}


def _hilbert_profile(n: int):
    def profile(s, r, c):
        return 1.0 / (s**n + r**n)

    return profile


def _hardy_profile(n: int):
    def profile(s, r, c):
        return np.where(r <= s, s ** (-float(n)), 0.0)

    return profile


def hilbert(n: int) -> FactorKernel:
    """Hilbert factor 1 / (|x|^n + |y|^n)."""
    return FactorKernel(n=n, profile=_hilbert_profile(n), name=f"hilbert(n={n})",
                        uses_angle=False, family="hilbert")


def hardy(n: int) -> FactorKernel:
    """Hardy averaging factor |x|^{-n} 1{|y| <= |x|}."""
    return FactorKernel(n=n, profile=_hardy_profile(n), name=f"hardy(n={n})",
                        uses_angle=False, family="hardy")


def zero_kernel(n: int) -> FactorKernel:
    return FactorKernel(n=n, profile=lambda s, r, c: 0.0, name=f"zero(n={n})", uses_angle=False)


def custom(n: int, profile: str | Profile, *, name: str | None = None,
           diagonal_singular: bool = False, breakpoints: Sequence[float] = (1.0,)) -> FactorKernel:
    """Factor kernel from a profile expression over s, r, c."""
    prof = parse_profile(profile) if isinstance(profile, str) else profile
    return FactorKernel(
        n=n,
        profile=prof,
        name=name or prof.source,
        diagonal_singular=diagonal_singular,
        uses_angle="c" in prof.variables,
        breakpoints=tuple(breakpoints),
        expression=prof.source,
    )


def product(*factors: FactorKernel) -> ProductKernel:
    return ProductKernel(tuple(factors))


def _radius_cosine(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.linalg.norm(x, axis=-1)
    r = np.linalg.norm(y, axis=-1)
    denom = s * r
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(denom > 0, np.sum(x * y, axis=-1) / np.where(denom > 0, denom, 1.0), 0.0)
    return s, r, np.clip(c, -1.0, 1.0)


def eval_factor(k: FactorKernel, x, y):
    """K(x, y) for points (or stacked points, last axis = coordinates) of R^n."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[-1] != k.n or y.shape[-1] != k.n:
        raise UsageError(
            f"kernel {k.name!r} acts on R^{k.n}; got points of dimension {x.shape[-1]} and {y.shape[-1]}"
        )
    s, r, c = _radius_cosine(x, y)
    out = k.evaluate(s, r, c)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HomogeneityReport:
    kernel: str
    samples: int
    max_residual: float
    worst_sample: tuple[float, float, float, float]
    passed: bool
    tolerance: float = HOMOGENEITY_TOL


def homogeneity_residual(k: FactorKernel, s, r, c, delta):
    """|kappa(d s, d r, c) - d^{-n} kappa(s, r, c)| / (d^{-n} kappa(s, r, c)).

    Zero when both sides vanish; +inf when only the reference side vanishes.
    """
    lhs = k.evaluate(np.multiply(delta, s), np.multiply(delta, r), c)
    ref = np.power(delta, -float(k.n)) * k.evaluate(s, r, c)
    diff = np.abs(lhs - ref)
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.where(ref != 0, diff / np.abs(ref), np.where(diff == 0, 0.0, np.inf))
    return res


def check_homogeneity(k: FactorKernel, sample_count: int = 1000, seed: int = 0,
                      tol: float = HOMOGENEITY_TOL) -> HomogeneityReport:
    """Sample (s, r, c, delta) and measure the degree -n homogeneity residual."""
    if sample_count < 1:
        raise UsageError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    s = np.exp(rng.uniform(-3.0, 3.0, sample_count))
    r = np.exp(rng.uniform(-3.0, 3.0, sample_count))
    if k.n == 1:
        c = rng.choice([-1.0, 1.0], sample_count)
    else:
        c = rng.uniform(-1.0, 1.0, sample_count)
    delta = np.exp(rng.uniform(-3.0, 3.0, sample_count))
    res = homogeneity_residual(k, s, r, c, delta)
    i = int(np.argmax(res))
    worst = float(res[i])
    return HomogeneityReport(
        kernel=k.name,
        samples=sample_count,
        max_residual=worst,
        worst_sample=(float(s[i]), float(r[i]), float(c[i]), float(delta[i])),
        passed=bool(worst <= tol),
        tolerance=tol,
    )


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(n) via QR of a Gaussian matrix."""
    q, rmat = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(rmat))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def factor_from_spec(entry: dict) -> FactorKernel:
    if not isinstance(entry, dict):
        raise UsageError(f"factor entry must be an object, got {entry!r}")
    if "n" not in entry or "type" not in entry:
        raise UsageError(f"factor entry needs 'n' and 'type': {entry!r}")
    n = entry["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise UsageError(f"'n' must be a positive integer, got {n!r}")
    kind = entry["type"]
    if kind not in KERNEL_TYPES:
        raise UsageError(f"unknown kernel type {kind!r}; expected one of {KERNEL_TYPES}")
    has_profile = "profile" in entry
    if kind == "custom":
        if not has_profile:
            raise UsageError("custom factors require a 'profile' expression")
        return custom(
            n,
            entry["profile"],
            name=entry.get("name"),
            diagonal_singular=bool(entry.get("diagonal_singular", False)),
            breakpoints=tuple(entry.get("breakpoints", (1.0,))),
        )
    if has_profile:
        raise UsageError(f"'profile' is only allowed for custom factors, not {kind!r}")
    return hilbert(n) if kind == "hilbert" else hardy(n)


def kernel_from_spec(spec: dict) -> ProductKernel:
    """ProductKernel from the kernel JSON document ``{"factors": [...]}``."""
    if not isinstance(spec, dict) or not isinstance(spec.get("factors"), list):
        raise UsageError("kernel spec must be an object with a 'factors' list")
    return ProductKernel(tuple(factor_from_spec(e) for e in spec["factors"]))


def load_kernel(path: str | Path) -> ProductKernel:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read kernel file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"kernel file {path} is not valid JSON: {exc}") from exc
    return kernel_from_spec(doc)


# fixed tanh-sinh level for the angular part of diagonal-singular kernels:
# c = cos(theta) cannot resolve angles below ~1e-8, so the angular integrand is
# a rounding staircase very near the diagonal and adaptive refinement would
# never contract there; the outer radial integral still controls the error.
DIAGONAL_ANGULAR_LEVEL = 6


def sphere_average(k: FactorKernel, r, spec=None) -> np.ndarray:
    """A(r) = integral over S^{n-1} of kappa(1, r, <e_1, sigma>) d sigma, vectorized in r.

    Only the unit-radius first argument is ever needed: homogeneity moves
    every other radius onto it.
    """
    from .quadrature import integrate_angular
    from .specfun import sphere_area

    r = np.asarray(r, dtype=float)

    def kappa(c):
        vals = k.evaluate(1.0, r[..., None], c)
        if k.diagonal_singular:
            # the singular point itself is a null set
            vals = np.where(np.isposinf(vals), 0.0, vals)
        return vals

    if k.n == 1:
        return kappa(np.array([1.0, -1.0])).sum(axis=-1)
    if not k.uses_angle:
        return sphere_area(k.n) * kappa(np.array([0.0]))[..., 0]
    if k.diagonal_singular:
        # the peak at (r, c) = (1, 1) has angular width ~ |ln r|; cut there so
        # the rule resolves it on both sides
        split = np.clip(4.0 * np.abs(np.log(r)), 1e-300, 1.0)
        return np.asarray(integrate_angular(kappa, k.n, spec, split=split, fixed_level=DIAGONAL_ANGULAR_LEVEL))
    return np.asarray(integrate_angular(kappa, k.n, spec))

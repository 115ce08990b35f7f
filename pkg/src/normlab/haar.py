"""The multiplicative group G = (0, inf)^m with Haar measure dx / (x_1 ... x_m).

Boxes keep their endpoints as exact rationals, so scaling and inversion are
exact operations and measure invariance holds bit-for-bit rather than up to
rounding: ln(c d / c a) is evaluated as ln of the *same* rational d / a.

The H-kernel turns the sharp constant into an L^1(G) norm:

    H_i(t) = t^{n_i/p'} A_i(t),   A_i(t) = int_{S^{n_i-1}} kappa_i(1, t, c) d sigma,
    ||H||_{L^1(G)} = prod_i int_0^inf H_i(t) dt / t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import DomainError, UsageError
from .exponent import LebesgueExponent
from .kernels import FactorKernel, ProductKernel, sphere_average
from .parallel import ordered_map
from .quadrature import DEFAULT_SPEC, QuadResult, QuadratureSpec, integrate_halfline

INF = math.inf


def _endpoint(x):
    if isinstance(x, float) and math.isinf(x):
        if x < 0:
            raise DomainError("box endpoints must be >= 0")
        return INF
    q = x if isinstance(x, Rational) else Fraction(x)
    q = Fraction(q)
    if q < 0:
        raise DomainError("box endpoints must be >= 0")
    return q


@dataclass(frozen=True)
class HaarBox:
    """Product of open intervals (c_i, d_i) with 0 <= c_i < d_i <= inf."""

    intervals: tuple[tuple[Fraction | float, Fraction | float], ...]

    def __post_init__(self):
        ivs = tuple((_endpoint(c), _endpoint(d)) for c, d in self.intervals)
        if not ivs:
            raise UsageError("a box needs at least one interval")
        for c, d in ivs:
            if not c < d:
                raise DomainError(f"empty interval ({c}, {d})")
            if c == INF:
                raise DomainError("left endpoint cannot be infinite")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def of(cls, *intervals) -> HaarBox:
        return cls(tuple(intervals))

    @property
    def m(self) -> int:
        return len(self.intervals)

    @property
    def finite(self) -> bool:
        return all(c > 0 and d != INF for c, d in self.intervals)

    def as_floats(self) -> list[tuple[float, float]]:
        return [(float(c), float(d)) for c, d in self.intervals]


def _log_ratio(q: Fraction) -> float:
    # ln(num) - ln(den) keeps precision for ratios whose float would overflow
    return math.log(q.numerator) - math.log(q.denominator)


def haar_measure(box: HaarBox) -> float:
    """prod_i ln(d_i / c_i); inf when any interval touches 0 or inf."""
    if not box.finite:
        return INF
    out = 1.0
    for c, d in box.intervals:
        out *= _log_ratio(d / c)
    return out


def scale_box(box: HaarBox, c: Sequence) -> HaarBox:
    """Left translation by c in G: (a, b) -> (c a, c b) coordinatewise."""
    c = [_endpoint(x) for x in c]
    if len(c) != box.m:
        raise UsageError(f"scaling point has {len(c)} coordinates, box has {box.m}")
    if any(x == 0 or x == INF for x in c):
        raise DomainError("scaling point must lie in (0, inf)^m")
    return HaarBox(tuple((x * a, x * b if b != INF else INF) for x, (a, b) in zip(c, box.intervals)))


def invert_box(box: HaarBox) -> HaarBox:
    """Image under x -> 1/x: (a, b) -> (1/b, 1/a)."""

    def inv(x):
        if x == INF:
            return Fraction(0)
        if x == 0:
            return INF
        return 1 / x

    return HaarBox(tuple((inv(b), inv(a)) for a, b in box.intervals))


def exhaustion_measures(m: int, ks: Sequence[int]) -> list[float]:
    """Haar measures of (1/k, k)^m; finite for every k, unbounded in k."""
    return [haar_measure(HaarBox(tuple((Fraction(1, k), Fraction(k)) for _ in range(m)))) for k in ks]


def random_box(rng: np.random.Generator, m: int, denom: int = 1000) -> HaarBox:
    ivs = []
    for _ in range(m):
        a, b = sorted(int(v) for v in rng.integers(1, 100 * denom, size=2))
        if a == b:
            b += 1
        ivs.append((Fraction(a, denom), Fraction(b, denom)))
    return HaarBox(tuple(ivs))


def random_point(rng: np.random.Generator, m: int, denom: int = 1000) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(v), denom) for v in rng.integers(1, 100 * denom, size=m))


@dataclass
class HaarSuiteReport:
    seed: int
    count: int
    scale_failures: int
    invert_failures: int
    max_scale_residual: float
    max_invert_residual: float
    exhaustion: list[float]
    exhaustion_ok: bool

    @property
    def passed(self) -> bool:
        return self.scale_failures == 0 and self.invert_failures == 0 and self.exhaustion_ok

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "scale_failures": self.scale_failures,
            "invert_failures": self.invert_failures,
            "max_scale_residual": self.max_scale_residual,
            "max_invert_residual": self.max_invert_residual,
            "exhaustion_k": list(EXHAUSTION_K),
            "exhaustion_measures": self.exhaustion,
            "exhaustion_ok": self.exhaustion_ok,
            "pass": self.passed,
        }

    def rows(self) -> list[dict]:
        return [
            {"route": "scale_invariance", "value": self.max_scale_residual, "err_est": 0.0,
             "deviation": self.max_scale_residual, "pass": self.scale_failures == 0},
            {"route": "inversion_invariance", "value": self.max_invert_residual, "err_est": 0.0,
             "deviation": self.max_invert_residual, "pass": self.invert_failures == 0},
            {"route": "exhaustion", "value": self.exhaustion[-1], "err_est": 0.0,
             "deviation": 0.0, "pass": self.exhaustion_ok},
        ]


EXHAUSTION_K = (2, 4, 8, 16, 32, 64)


def haar_property_suite(seed: int = 0, count: int = 100, max_m: int = 3) -> HaarSuiteReport:
    """Seeded invariance checks: mu(cA) = mu(A) and mu(A^-1) = mu(A), compared exactly."""
    rng = np.random.default_rng(seed)
    sf = inv_f = 0
    smax = imax = 0.0
    for _ in range(count):
        m = int(rng.integers(1, max_m + 1))
        box = random_box(rng, m)
        mu = haar_measure(box)
        ms = haar_measure(scale_box(box, random_point(rng, m)))
        mi = haar_measure(invert_box(box))
        sf += ms != mu
        inv_f += mi != mu
        smax = max(smax, abs(ms - mu))
        imax = max(imax, abs(mi - mu))
    meas = exhaustion_measures(2, EXHAUSTION_K)
    ok = all(math.isfinite(v) for v in meas) and all(b > a for a, b in zip(meas, meas[1:]))
    ok = ok and all(math.isclose(v, (2 * math.log(k)) ** 2, rel_tol=1e-14) for v, k in zip(meas, EXHAUSTION_K))
    return HaarSuiteReport(seed, count, int(sf), int(inv_f), smax, imax, meas, bool(ok))


# ---------------------------------------------------------------------------
# H-kernel


@dataclass(frozen=True)
class HFactor:
    """H_i(t) = t^{w} A_i(t) with w = n/p' (n/p with the adjoint weight)."""

    kernel: FactorKernel
    weight: float
    spec: QuadratureSpec = DEFAULT_SPEC

    @property
    def n(self) -> int:
        return self.kernel.n

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("H is defined on (0, inf)")
        with np.errstate(over="ignore", invalid="ignore"):
            return t**self.weight * sphere_average(self.kernel, t, self.spec)

    def log_eval(self, tau):
        """H~(tau) = H(e^tau); zero outside |tau| <= 700/(n+1) where exp overflows."""
        tau = np.asarray(tau, dtype=float)
        lim = 700.0 / (self.n + 1)
        inside = np.abs(tau) <= lim
        safe = np.where(inside, tau, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.exp(self.weight * safe) * sphere_average(self.kernel, np.exp(safe), self.spec)
        return np.where(inside, vals, 0.0)


@dataclass(frozen=True)
class HKernel:
    factors: tuple[HFactor, ...]
    p: LebesgueExponent
    dual: bool = False

    @property
    def m(self) -> int:
        return len(self.factors)

    def __call__(self, *ts):
        if len(ts) != self.m:
            raise UsageError(f"H takes {self.m} arguments, got {len(ts)}")
        out = 1.0
        for h, t in zip(self.factors, ts):
            out = out * h(t)
        return out


def build_H(K: ProductKernel, p, spec: QuadratureSpec | None = None, *, dual: bool = False) -> HKernel:
    p = LebesgueExponent.coerce(p)
    spec = spec or DEFAULT_SPEC
    factors = tuple(HFactor(k, k.n * (p.inv if dual else p.inv_conj), spec) for k in K.factors)
    return HKernel(factors, p, dual)


def H_factor_norm(h: HFactor, spec: QuadratureSpec | None = None) -> QuadResult:
    """int_0^inf H(t) dt / t by the half-line engine."""
    spec = spec or h.spec

    def f(t):
        with np.errstate(over="ignore", invalid="ignore"):
            return t ** (h.weight - 1.0) * sphere_average(h.kernel, t, spec)

    return integrate_halfline(f, spec, h.kernel.breakpoints, log_window=700.0 / (h.n + 1))


def H_factor_norms(H: HKernel, spec: QuadratureSpec | None = None, workers: int | None = None) -> list[QuadResult]:
    return ordered_map(lambda h: H_factor_norm(h, spec), H.factors, workers)


def H_l1_norm(H: HKernel, spec: QuadratureSpec | None = None, workers: int | None = None) -> float:
    """||H||_{L^1(G)} = prod_i int H_i dt/t."""
    return math.prod(v for v, _ in H_factor_norms(H, spec, workers))

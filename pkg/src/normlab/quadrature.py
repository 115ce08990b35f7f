"""One-dimensional quadrature on (0, inf) and on spheres.

Everything reduces to integrals in the log-radius ``t = ln r``. The real line
is cut at breakpoints (by default only at ``t = 0``, the diagonal ``r = 1``
where homogeneous kernels are typically non-smooth) and each piece is
integrated with a double-exponential rule:

* half-lines ``[tau, inf)`` / ``(-inf, tau]`` use ``t = tau +/- exp(u - exp(-u))``,
  the DE map for exponentially decaying integrands (power behaviour in r
  becomes exponential decay in t);
* finite pieces use tanh-sinh.

Trapezoid sums in u are refined by halving the step; nodes of each level are
reused by the next. Convergence is declared once successive levels differ by
at most ``max(rel_tol * |value|, abs_tol)``. Integrands may be batched: a
callable mapping a 1-D node array of length k to an array of shape (..., k)
yields results of shape (...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DivergenceSuspected, DomainError, UsageError
from .specfun import sphere_area

DOUBLE_EXPONENTIAL = "double-exponential"
GAUSS_LEGENDRE = "gauss-legendre"
METHODS = (DOUBLE_EXPONENTIAL, GAUSS_LEGENDRE)

# exp(t) stays finite (and r^n for moderate n) for |t| below this
DEFAULT_LOG_WINDOW = 700.0

_MIN_LEVEL = 3
_DE_STEP0 = 0.5
_HALF_U = (-6.5, 7.0)
_FINITE_U = (-4.0, 4.0)
_GL_ORDER = 15
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class QuadratureSpec:
    """Method and tolerances shared by every 1-D integration."""

    method: str = DOUBLE_EXPONENTIAL
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_level: int = 12
    growth_bound: float = 1e12

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(f"unknown quadrature method {self.method!r}; expected one of {METHODS}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise UsageError("quadrature tolerances must be positive")
        if self.max_level < 3:
            raise UsageError("max_level must be at least 3")
        if not self.growth_bound > 0:
            raise UsageError("growth_bound must be positive")


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float | np.ndarray
    err_est: float | np.ndarray


def _as_result(value, err) -> QuadResult:
    value = np.asarray(value, dtype=float)
    err = np.asarray(err, dtype=float)
    if value.ndim == 0:
        return QuadResult(float(value), float(err))
    return QuadResult(value, err)


class _NonFinite(DivergenceSuspected):
    def __init__(self, message: str, nodes: np.ndarray):
        super().__init__(message)
        self.nodes = nodes


def _eval(g: Callable, x: np.ndarray, what: str) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        vals = np.asarray(g(x), dtype=float) * np.ones_like(x)
    if not np.isfinite(vals).all():
        bad = ~np.isfinite(vals.reshape(-1, x.size)).all(axis=0)
        nodes = x[bad]
        raise _NonFinite(f"{what}: integrand is not finite at t={float(nodes[0]):.6g}", nodes)
    return vals


def _converged(cur, prev, spec: QuadratureSpec) -> bool:
    diff = np.abs(cur - prev)
    return bool(np.all(diff <= np.maximum(spec.rel_tol * np.abs(cur), spec.abs_tol)))


def _check_growth(value, ref, spec: QuadratureSpec, what: str):
    """Unconverged partial sums that outgrow the first estimate by ``growth_bound``.

    The bound is relative to the coarsest estimate ``ref`` so that legitimately
    large (but convergent) integrals are not mistaken for divergent ones.
    """
    scale = np.maximum(np.abs(ref), spec.abs_tol)
    if np.any(np.abs(value) > spec.growth_bound * scale):
        raise DivergenceSuspected(
            f"{what}: partial sums grew past {spec.growth_bound:g} times the first estimate without converging"
        )


def _de_sum(g, xmap, u_range, spec: QuadratureSpec, what: str) -> QuadResult:
    """Nested trapezoid sums of g(x(u)) x'(u) on a uniform u grid."""
    u_lo, u_hi = u_range
    total = None
    prev = first = None
    for level in range(spec.max_level + 1):
        h = _DE_STEP0 / 2**level
        j = np.arange(math.ceil(u_lo / h), math.floor(u_hi / h) + 1)
        if level > 0:
            j = j[j % 2 == 1]
        x, dx, keep = xmap(j * h)
        x, dx = x[keep], dx[keep]
        part = (_eval(g, x, what) * dx).sum(axis=-1) if x.size else 0.0
        total = part if total is None else total + part
        cur = h * total
        if prev is not None and level >= _MIN_LEVEL and _converged(cur, prev, spec):
            return _as_result(cur, np.abs(cur - prev))
        if first is None:
            first = cur
        else:
            _check_growth(cur, first, spec, what)
        prev = cur
    raise DivergenceSuspected(f"{what}: refinement failed to contract after {spec.max_level} levels")


def _de_fixed(g, xmap, u_range, level: int, what: str) -> QuadResult:
    """Trapezoid sum at one fixed step 0.5/2^level; err_est from the half-step sum."""
    u_lo, u_hi = u_range
    h = _DE_STEP0 / 2**level
    j = np.arange(math.ceil(u_lo / h), math.floor(u_hi / h) + 1)
    x, dx, keep = xmap(j * h)
    terms = _eval(g, x[keep], what) * dx[keep]
    fine = h * terms.sum(axis=-1)
    coarse = 2 * h * terms[..., (j[keep] % 2) == 0].sum(axis=-1)
    return _as_result(fine, np.abs(fine - coarse))


def _halfline_map(tau: float, direction: int, window: float):
    def xmap(u):
        phi = np.exp(u - np.exp(-u))
        x = tau + direction * phi
        dx = phi * (1.0 + np.exp(-u))
        return x, dx, (np.abs(x) <= window) & (dx > 0)

    return xmap


def _tanh_sinh_map(a: float, b: float):
    half = 0.5 * (b - a)

    def xmap(u):
        v = 0.5 * math.pi * np.sinh(u)
        with np.errstate(over="ignore"):
            left = a + (b - a) / (1.0 + np.exp(-2.0 * v))
            right = b - (b - a) / (1.0 + np.exp(2.0 * v))
            dx = half * 0.5 * math.pi * np.cosh(u) / np.cosh(v) ** 2
        x = np.where(v < 0, left, right)
        return x, dx, dx > 0

    return xmap


def _gl_adaptive(g, a: float, b: float, spec: QuadratureSpec, what: str) -> QuadResult:
    """Breadth-first adaptive bisection with a 15-point Gauss-Legendre panel rule."""

    def panel_values(lo, hi):
        mid = 0.5 * (lo + hi)
        rad = 0.5 * (hi - lo)
        x = mid[:, None] + rad[:, None] * _GL_X[None, :]
        vals = _eval(g, x.ravel(), what)
        vals = vals.reshape(vals.shape[:-1] + x.shape)
        return (vals * _GL_W).sum(axis=-1) * rad

    lo = np.array([a])
    hi = np.array([b])
    coarse = panel_values(lo, hi)
    coarse0 = coarse[..., 0]
    scale = np.abs(coarse0)
    accepted = 0.0
    err = 0.0
    for depth in range(spec.max_level + 1):
        mid = 0.5 * (lo + hi)
        halves = panel_values(np.concatenate([lo, mid]), np.concatenate([mid, hi]))
        k = lo.size
        fine = halves[..., :k] + halves[..., k:]
        diff = np.abs(fine - coarse)
        frac = (hi - lo) / (b - a)
        tol = np.maximum(spec.rel_tol * np.maximum(np.abs(fine), scale[..., None] * frac), spec.abs_tol * frac)
        ok = np.all(diff <= tol, axis=tuple(range(diff.ndim - 1)))
        accepted = accepted + fine[..., ok].sum(axis=-1)
        err = err + diff[..., ok].sum(axis=-1)
        if ok.all():
            return _as_result(accepted, err)
        _check_growth(accepted + fine[..., ~ok].sum(axis=-1), coarse0, spec, what)
        lo, hi, m = lo[~ok], hi[~ok], mid[~ok]
        coarse = np.concatenate([halves[..., :k][..., ~ok], halves[..., k:][..., ~ok]], axis=-1)
        lo, hi = np.concatenate([lo, m]), np.concatenate([m, hi])
    raise DivergenceSuspected(f"{what}: adaptive panels failed to converge at depth {spec.max_level}")


def _check_tail(g, x_edge: float, dx_edge: float, value, spec: QuadratureSpec, what: str):
    term = np.abs(_eval(g, np.array([x_edge]), what)[..., 0]) * dx_edge
    if np.any(term > np.maximum(spec.rel_tol * np.abs(value), spec.abs_tol)):
        raise DivergenceSuspected(
            f"{what}: integrand does not decay at the truncation point t={x_edge:.6g}"
        )


def _halfline_piece(g, tau: float, direction: int, spec: QuadratureSpec, window: float, what: str):
    # Overflow deep in a tail (r^k -> inf) shows up as inf/inf; pull the cut
    # inwards and let the decay check at the new cut judge the truncation.
    for _ in range(12):
        try:
            return _halfline_piece_fixed(g, tau, direction, spec, window, what)
        except _NonFinite as exc:
            depth = np.min(direction * (exc.nodes - tau))
            if depth < 8.0:
                raise
            window = abs(tau) + 0.5 * depth
    raise DivergenceSuspected(f"{what}: integrand is not finite in the tail")


def _halfline_piece_fixed(g, tau, direction, spec, window, what):
    room = window - direction * tau
    if room <= 0:
        return QuadResult(0.0, 0.0)
    if spec.method == DOUBLE_EXPONENTIAL:
        xmap = _halfline_map(tau, direction, window)
        res = _de_sum(g, xmap, _HALF_U, spec, what)
        # |x'(u)| = phi (1 + e^{-u}) <= 2 phi once phi >= 1
        _check_tail(g, tau + direction * room, 2.0 * room, res.value, spec, what)
        return res
    s_max = room / (1.0 + room)

    def mapped(s):
        return g(tau + direction * s / (1.0 - s)) / (1.0 - s) ** 2

    try:
        res = _gl_adaptive(mapped, 0.0, s_max, spec, what)
    except _NonFinite as exc:
        raise _NonFinite(str(exc), tau + direction * exc.nodes / (1.0 - exc.nodes)) from None
    _check_tail(g, tau + direction * room, (1.0 + room) ** 2, res.value, spec, what)
    return res


def _finite_piece(g, a: float, b: float, spec: QuadratureSpec, what: str) -> QuadResult:
    if spec.method == DOUBLE_EXPONENTIAL:
        return _de_sum(g, _tanh_sinh_map(a, b), _FINITE_U, spec, what)
    # x = a + (b - a)(3u^2 - 2u^3) flattens algebraic endpoint singularities,
    # which plain bisection would otherwise have to chase to great depth
    width = b - a

    def smoothed(u):
        return g(a + width * u * u * (3.0 - 2.0 * u)) * (6.0 * width * u * (1.0 - u))

    return _gl_adaptive(smoothed, 0.0, 1.0, spec, what)


def integrate_interval(g: Callable, a: float, b: float, spec: QuadratureSpec | None = None) -> QuadResult:
    """Integral of g over the finite interval [a, b] (endpoint singularities allowed)."""
    spec = spec or DEFAULT_SPEC
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integrate_interval needs finite limits")
    if a == b:
        return QuadResult(0.0, 0.0)
    if a > b:
        v, e = integrate_interval(g, b, a, spec)
        return _as_result(-np.asarray(v), e)
    return _finite_piece(g, a, b, spec, f"integral over [{a:g}, {b:g}]")


def integrate_logline(g: Callable, spec: QuadratureSpec | None = None,
                      breakpoints: Sequence[float] = (0.0,),
                      window: float = DEFAULT_LOG_WINDOW) -> QuadResult:
    """Integral of g(t) over the whole real line, g decaying exponentially as |t| -> inf.

    The line is cut at ``breakpoints``; nodes with |t| > ``window`` are dropped
    and a non-negligible integrand at the cut raises DivergenceSuspected.
    """
    spec = spec or DEFAULT_SPEC
    cuts = sorted({float(b) for b in breakpoints})
    if not cuts:
        cuts = [0.0]
    what = "log-line integral"
    pieces = [_halfline_piece(g, cuts[0], -1, spec, window, what)]
    for a, b in zip(cuts[:-1], cuts[1:]):
        pieces.append(_finite_piece(g, a, b, spec, what))
    pieces.append(_halfline_piece(g, cuts[-1], +1, spec, window, what))
    value = sum(np.asarray(p.value) for p in pieces)
    err = sum(np.asarray(p.err_est) for p in pieces)
    return _as_result(value, err)


def integrate_halfline(f: Callable, spec: QuadratureSpec | None = None,
                       breakpoints: Sequence[float] = (1.0,),
                       log_window: float = DEFAULT_LOG_WINDOW) -> QuadResult:
    """Integral of f(r) over (0, inf) via r = e^t and double-exponential quadrature.

    Args:
        f: vectorized integrand; may be batched (see module docstring).
        spec: method and tolerances.
        breakpoints: radii where f is not smooth (the rule splits there).
        log_window: |ln r| beyond which the integrand is treated as truncated.

    Returns:
        (value, err_est), err_est being the last refinement difference.

    Raises:
        DivergenceSuspected: refinement does not contract, partial sums blow
            past ``spec.growth_bound`` or the integrand does not decay.
    """
    bps = [float(b) for b in breakpoints]
    if any(not b > 0 for b in bps):
        raise DomainError("half-line breakpoints must be positive radii")

    def g(t):
        r = np.exp(t)
        return f(r) * r

    return integrate_logline(g, spec, [math.log(b) for b in bps], log_window)


def integrate_angular(g: Callable, n: int, spec: QuadratureSpec | None = None, split=None,
                      fixed_level: int | None = None):
    """Integral over S^{n-1} of g(<e_1, sigma>) d sigma.

    For n = 1 this is g(1) + g(-1). For n >= 2 the zonal reduction
    omega_{n-2} * int_{-1}^{1} g(c) (1 - c^2)^{(n-3)/2} dc is evaluated in the
    angle variable c = cos(theta), which removes the endpoint singularity of
    the weight at n = 2.

    ``split`` (scalar or batch-shaped array of angles in (0, pi)) cuts the
    theta-range in two; use it when g has a narrow peak of that width at
    theta = 0. The nodes then carry the batch shape, so g must broadcast.

    ``fixed_level`` replaces adaptive refinement by a single tanh-sinh sum
    with step 0.5/2^level, for integrands whose values carry rounding noise
    that adaptive refinement would chase.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"sphere dimension must be a positive integer, got {n!r}")
    n = int(n)
    if n == 1:
        vals = np.asarray(g(np.array([1.0, -1.0])), dtype=float) * np.ones(2)
        out = vals.sum(axis=-1)
        return float(out) if out.ndim == 0 else out
    spec = spec or DEFAULT_SPEC
    power = n - 2

    def integrand(theta):
        vals = np.asarray(g(np.cos(theta)), dtype=float)
        return vals * np.sin(theta) ** power if power else vals

    what = "angular integral"

    def interval(f, a, b):
        if fixed_level is None:
            return integrate_interval(f, a, b, spec).value
        return _de_fixed(f, _tanh_sinh_map(a, b), _FINITE_U, fixed_level, what).value

    if split is None:
        value = np.asarray(interval(integrand, 0.0, math.pi))
    else:
        cut = np.asarray(split, dtype=float)[..., None]
        if np.any(~(cut > 0)) or np.any(~(cut < math.pi)):
            raise DomainError("angular split points must lie in (0, pi)")
        near = interval(lambda x: integrand(cut * x) * cut, 0.0, 1.0)
        far = interval(lambda x: integrand(cut + (math.pi - cut) * x) * (math.pi - cut), 0.0, 1.0)
        value = np.asarray(near) + np.asarray(far)
    value = value * sphere_area(n - 1)
    return float(value) if value.ndim == 0 else value

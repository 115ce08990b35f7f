"""Empirical sharpness checks on the log-radius grid.

In t = ln r the operator becomes a correlation on the line,

    (T~h)(s) = int H~(t - s) h(t) dt,      H~(t) = H(e^t),

whose L^p norm is ||H~||_{L^1(R)} = C. On a uniform grid t_j = -L + j delta
we use

    (M u)_i = sum_j k_{j-i} mu_j u_j,     ||u||^p = sum_i mu_i |u_i|^p,

with trapezoid weights mu and *tent-averaged* kernel samples
k_q = (1/delta) int (1 - |u|/delta)_+ H~(q delta + u) du. Tents form a partition
of unity, so sum_q delta k_q <= C and Schur's test bounds every discrete
quotient by C -- the discretization can only err on the low side.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import fftconvolve

from .errors import DomainError, UsageError
from .exponent import LebesgueExponent
from .haar import HFactor, build_H
from .kernels import ProductKernel
from .quadrature import QuadratureSpec

TOL_DISC = 1e-3
TRUNCATION_WARN = 1e-6
EPS_LADDER = (0.5, 0.2, 0.1, 0.05)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class TruncationWarning(UserWarning):
    pass


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LogGrid:
    """Uniform grid on [-L, L] in log radius; N odd so that t = 0 is a node."""

    half_width: float = 30.0
    points: int = 4001

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise DomainError("grid half-width must be positive and finite")
        if self.points < 3 or self.points % 2 == 0:
            raise DomainError(f"grid needs an odd number of points >= 3, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights mu_j (spacing included)."""
        w = np.full(self.points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    @classmethod
    def covering(cls, eps: float, spacing: float = 0.015, min_half_width: float = 30.0) -> LogGrid:
        """Grid wide enough that e^{-eps L} <= 1e-8, at (about) the given spacing."""
        if not eps > 0:
            raise DomainError("eps must be positive")
        spacing = min(spacing, 0.05 / eps)
        L = max(min_half_width, math.log(1e8) / eps)
        half = math.ceil(L / spacing)
        return cls(half * spacing, 2 * half + 1)


def tent_kernel(h: HFactor, grid: LogGrid) -> np.ndarray:
    """Tent averages k_q of H~ for q = -(N-1) .. N-1 (length 2N-1)."""
    d = grid.spacing
    q = np.arange(-(grid.points - 1), grid.points) * d
    # (1/d) int_{-d}^{d} (1-|u|/d) H~(q+u) du, one Gauss rule per half so that
    # a jump of H~ at a grid node (e.g. the Hardy diagonal) is never straddled
    u = 0.5 * d * (_GL_NODES + 1.0)  # nodes on (0, d)
    tent = 1.0 - u / d
    right = h.log_eval(q[:, None] + u[None, :])
    left = h.log_eval(q[:, None] - u[None, :])
    return 0.5 * ((right + left) * tent * _GL_WEIGHTS).sum(axis=1)


def _lp_norm(u: np.ndarray, mu: np.ndarray, p: float) -> float:
    return float(np.sum(mu * np.abs(u) ** p) ** (1.0 / p))


def apply_factor(k: np.ndarray, u: np.ndarray, grid: LogGrid, axis: int = -1) -> np.ndarray:
    """(M u)_i = sum_j k_{j-i} mu_j u_j along ``axis``, by FFT correlation."""
    n = grid.points
    u = np.moveaxis(np.asarray(u, dtype=float), axis, -1)
    if u.shape[-1] != n:
        raise UsageError(f"vector has {u.shape[-1]} samples, grid has {n}")
    v = u * grid.weights
    kr = k[::-1].reshape((1,) * (v.ndim - 1) + (-1,))
    out = fftconvolve(v, kr, axes=-1)[..., n - 1: 2 * n - 1]
    # FFT round-off can leave tiny negatives for a nonnegative operator
    out = np.maximum(out, 0.0) if np.all(u >= 0) else out
    return np.moveaxis(out, -1, axis)


def dense_factor(k: np.ndarray, grid: LogGrid) -> np.ndarray:
    """Dense M with M_ij = k_{j-i} mu_j."""
    n = grid.points
    col = k[n - 1::-1]  # M_{i0} = k_{-i}
    row = k[n - 1:]  # M_{0j} = k_j
    return toeplitz(col, row) * grid.weights[None, :]


def profile_lp_norm_p(eps: float, p) -> float:
    """||e^{-eps|t|}||_{L^p(R)}^p = 2 / (p eps)."""
    p = LebesgueExponent.coerce(p)
    if not eps > 0:
        raise DomainError("eps must be positive")
    return 2.0 / (p.p * eps)


def _factors(K: ProductKernel, p, spec, dual=False):
    return build_H(K, p, spec, dual=dual).factors


@dataclass
class ExtremalResult:
    eps: float
    ratio: float
    per_factor: list[float]
    grid: LogGrid
    truncation_mass: float
    warnings: list[str] = field(default_factory=list)


def extremal_ratio(K: ProductKernel, p, eps: float, grid: LogGrid | None = None,
                   spec: QuadratureSpec | None = None) -> ExtremalResult:
    """R(eps) = ||T~ h_eps|| / ||h_eps|| for h_eps = prod_i e^{-eps|t_i|}.

    The test function and the operator are tensor products, so R is the
    product of one-dimensional ratios. Without ``grid`` a covering grid with
    e^{-eps L} <= 1e-8 is used.
    """
    p = LebesgueExponent.coerce(p)
    if not eps > 0:
        raise DomainError("eps must be positive")
    grid = grid or LogGrid.covering(eps)
    mass = math.exp(-p.p * eps * grid.half_width)
    notes = []
    if mass > TRUNCATION_WARN:
        msg = (f"grid half-width {grid.half_width:g} truncates h_eps (eps={eps:g}): "
               f"boundary mass {mass:.2e} > {TRUNCATION_WARN:g}")
        notes.append(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    t = grid.nodes
    u = np.exp(-eps * np.abs(t))
    mu = grid.weights
    nu = _lp_norm(u, mu, p.p)
    ratios = []
    for h in _factors(K, p, spec):
        k = tent_kernel(h, grid)
        ratios.append(_lp_norm(apply_factor(k, u, grid), mu, p.p) / nu)
    return ExtremalResult(eps, math.prod(ratios), ratios, grid, mass, notes)


@dataclass
class LadderReport:
    p: float
    constant: float
    results: list[ExtremalResult]
    monotone: bool
    final_fraction: float
    threshold: float
    tolerance: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_fraction >= self.threshold

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "constant": self.constant,
            "ladder": [
                {"eps": r.eps, "ratio": r.ratio, "ratio_over_constant": r.ratio / self.constant,
                 "per_factor": r.per_factor, "grid_half_width": r.grid.half_width,
                 "grid_points": r.grid.points, "truncation_mass": r.truncation_mass,
                 "err_est": TOL_DISC * self.constant, **({"warnings": r.warnings} if r.warnings else {})}
                for r in self.results
            ],
            "monotone": self.monotone,
            "final_fraction": self.final_fraction,
            "threshold": self.threshold,
            "pass": self.passed,
        }

    def rows(self) -> list[dict]:
        return [{"route": f"extremal_eps={r.eps:g}", "value": r.ratio, "err_est": TOL_DISC * self.constant,
                 "deviation": r.ratio / self.constant - 1.0,
                 "pass": r.ratio <= self.constant * (1 + TOL_DISC)} for r in self.results]


def extremal_ladder(K: ProductKernel, p, eps_list: Sequence[float] = EPS_LADDER, constant: float | None = None,
                    spec: QuadratureSpec | None = None, threshold: float = 0.95, tol: float = 1e-9) -> LadderReport:
    """R(eps) down a decreasing ladder; passes if nondecreasing and R(eps_min) >= threshold * C."""
    from .sharp_constant import product_constant

    p = LebesgueExponent.coerce(p)
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if not eps_list:
        raise UsageError("empty eps ladder")
    if constant is None:
        constant = product_constant(K, p, spec).product_constant
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        results = [extremal_ratio(K, p, e, spec=spec) for e in eps_list]
    vals = [r.ratio for r in results]
    monotone = all(b >= a - tol * constant for a, b in zip(vals, vals[1:]))
    frac = vals[-1] / constant if constant else math.nan
    return LadderReport(p.p, constant, results, monotone, frac, threshold, tol)


@dataclass
class PowerResult:
    value: float
    quotients: list[float]
    converged: bool
    iterations: int


def _phi(v: np.ndarray, q: float) -> np.ndarray:
    return np.sign(v) * np.abs(v) ** (q - 1.0)


def nonlinear_power_method(M, p, iters: int = 200, seed: int = 0, tol: float = 1e-10) -> PowerResult:
    """Boyd's iteration for ||M||_{l^p -> l^p} of a nonnegative matrix.

    u <- Phi_{p'}(M^T Phi_p(M u)), normalized in l^p; the quotients
    ||M u||_p / ||u||_p are nondecreasing from a positive start.
    """
    p = LebesgueExponent.coerce(p)
    if iters < 1:
        raise UsageError("iters must be >= 1")
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise UsageError("M must be a matrix")
    if np.any(M < 0):
        raise DomainError("the power method here requires a nonnegative matrix")
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.5, 1.5, M.shape[1])
    u /= np.linalg.norm(u, p.p)
    quotients = [float(np.linalg.norm(M @ u, p.p))]
    converged = False
    for _ in range(iters):
        v = M.T @ _phi(M @ u, p.p)
        nv = np.linalg.norm(v, p.p_conj)
        if nv == 0:
            quotients.append(0.0)
            converged = True
            break
        u = _phi(v / nv, p.p_conj)
        u /= np.linalg.norm(u, p.p)
        quotients.append(float(np.linalg.norm(M @ u, p.p)))
        if abs(quotients[-1] - quotients[-2]) <= tol * max(quotients[-1], 1e-300):
            converged = True
            break
    return PowerResult(quotients[-1], quotients, converged, len(quotients) - 1)


@dataclass
class PowerBound:
    value: float
    per_factor: list[PowerResult]
    converged: bool
    warnings: list[str] = field(default_factory=list)


def power_method_lower_bound(K: ProductKernel, p, grid: LogGrid | None = None, iters: int = 200,
                             seed: int = 0, spec: QuadratureSpec | None = None, tol: float = 1e-10) -> PowerBound:
    """Product over factors of the discretized operator's p-norm estimate (a lower bound on C).

    Each factor's weighted operator is symmetrized to plain l^p via
    M' = D^{1/p} M D^{-1/p}, D = diag(mu).
    """
    p = LebesgueExponent.coerce(p)
    grid = grid or LogGrid()
    mu = grid.weights
    results = []
    for i, h in enumerate(_factors(K, p, spec)):
        M = dense_factor(tent_kernel(h, grid), grid)
        M *= (mu ** (1.0 / p.p))[:, None]
        M *= (mu ** (-1.0 / p.p))[None, :]
        results.append(nonlinear_power_method(M, p, iters, seed + i, tol))
        del M
    notes = []
    ok = all(r.converged for r in results)
    if not ok:
        worst = max(abs(r.quotients[-1] - r.quotients[-2]) / r.value for r in results if len(r.quotients) > 1)
        msg = f"power method not converged after {iters} iterations (last relative step {worst:.2e} > {tol:g})"
        notes.append(msg)
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    return PowerBound(math.prod(r.value for r in results), results, ok, notes)


# ---------------------------------------------------------------------------
# random upper-bound suite


def random_box_function(rng: np.random.Generator, grid: LogGrid, m: int, boxes: int | None = None):
    """Random nonnegative step function: a sum of boxes with random positive levels.

    Returned as (levels, [per-axis indicator matrices]) -- a rank-`boxes` tensor.
    """
    n = grid.points
    boxes = boxes or int(rng.integers(1, 6))
    levels = rng.uniform(0.1, 10.0, boxes)
    axes = []
    for _ in range(m):
        ind = np.zeros((boxes, n))
        for b in range(boxes):
            lo, hi = sorted(int(v) for v in rng.integers(0, n, size=2))
            ind[b, lo: hi + 1] = 1.0
        axes.append(ind)
    return levels, axes


def _tensor_norm(levels, axes, mu, p: float) -> float:
    """L^p norm of sum_b levels_b * prod_i axes[i][b]."""
    if p == 2.0:
        # Gram form: ||sum_b a_b (x) b_b||^2 = sum_{b,c} l_b l_c prod_i <a_b, a_c>_mu
        gram = np.outer(levels, levels)
        for a in axes:
            gram = gram * ((a * mu) @ a.T)
        return float(math.sqrt(max(gram.sum(), 0.0)))
    full = np.zeros(tuple(len(mu) for _ in axes))
    sub = "abcdefgh"[: len(axes)]
    for b, lv in enumerate(levels):
        full += lv * np.einsum(",".join(sub), *(a[b] for a in axes))
    wt = np.einsum(",".join(sub), *([mu] * len(axes)))
    return float(np.sum(wt * np.abs(full) ** p) ** (1.0 / p))


def rayleigh_quotient(kernels: Sequence[np.ndarray], levels, axes, grid: LogGrid, p: float) -> float:
    """||(M_1 (x) ... (x) M_m) f|| / ||f|| for a box-sum f; 0 for f = 0."""
    mu = grid.weights
    den = _tensor_norm(levels, axes, mu, p)
    if den == 0:
        return 0.0
    images = [apply_factor(k, a, grid) for k, a in zip(kernels, axes)]
    return _tensor_norm(levels, images, mu, p) / den


@dataclass
class UpperBoundReport:
    p: float
    seed: int
    count: int
    constant: float
    max_quotient: float
    quotients: list[float]
    exceedances: int
    tol_disc: float = TOL_DISC

    @property
    def passed(self) -> bool:
        return self.exceedances == 0

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "seed": self.seed,
            "count": self.count,
            "constant": self.constant,
            "bound": self.constant * (1 + self.tol_disc),
            "max_quotient": self.max_quotient,
            "max_quotient_err_est": self.tol_disc * self.constant,
            "max_ratio": self.max_quotient / self.constant if self.constant else None,
            "exceedances": self.exceedances,
            "tol_disc": self.tol_disc,
            "pass": self.passed,
        }

    def rows(self) -> list[dict]:
        return [{"route": "random_upper_bound", "value": self.max_quotient, "err_est": self.tol_disc * self.constant,
                 "deviation": self.max_quotient / self.constant - 1.0 if self.constant else 0.0,
                 "pass": self.passed}]


def random_upper_bound_check(K: ProductKernel, p, grid: LogGrid | None = None, seed: int = 0, count: int = 100,
                             constant: float | None = None, spec: QuadratureSpec | None = None,
                             tol_disc: float = TOL_DISC) -> UpperBoundReport:
    """Seeded random step functions; every quotient must stay below C (1 + tol_disc)."""
    from .sharp_constant import product_constant

    p = LebesgueExponent.coerce(p)
    if count < 1:
        raise UsageError("count must be >= 1")
    grid = grid or LogGrid()
    if constant is None:
        constant = product_constant(K, p, spec).product_constant
    kernels = [tent_kernel(h, grid) for h in _factors(K, p, spec)]
    rng = np.random.default_rng(seed)
    qs = []
    for _ in range(count):
        levels, axes = random_box_function(rng, grid, K.m)
        qs.append(rayleigh_quotient(kernels, levels, axes, grid, p.p))
    nonzero = [q for q in qs if q > 0]
    mx = max(nonzero) if nonzero else 0.0
    bound = constant * (1 + tol_disc)
    return UpperBoundReport(p.p, seed, count, constant, mx, qs, sum(q > bound for q in qs), tol_disc)

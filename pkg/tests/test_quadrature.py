import math

import numpy as np
import pytest
from scipy import integrate, special

from normlab.errors import DivergenceSuspected, DomainError, UsageError
from normlab.quadrature import (
    QuadratureSpec,
    integrate_angular,
    integrate_halfline,
    integrate_interval,
    integrate_logline,
)
from normlab.specfun import beta, sphere_area

METHODS = ["double-exponential", "gauss-legendre"]


@pytest.fixture(params=METHODS)
def spec(request):
    return QuadratureSpec(method=request.param)


def test_spec_validation():
    with pytest.raises(UsageError):
        QuadratureSpec(method="simpson")
    with pytest.raises(UsageError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(UsageError):
        QuadratureSpec(max_level=2)


@pytest.mark.parametrize("f, expected", [
    (lambda r: np.exp(-r), 1.0),
    (lambda r: r**-0.5 / (1 + r), math.pi),
    (lambda r: 1 / (1 + r**2), math.pi / 2),
])
def test_halfline_examples(spec, f, expected):
    value, err = integrate_halfline(f, spec)
    assert value == pytest.approx(expected, rel=1e-12)
    assert err >= 0


def test_beta_integrals(spec):
    rng = np.random.default_rng(2024)
    for a, b in rng.uniform(0.05, 5, (20, 2)):
        value, _ = integrate_halfline(lambda r: r ** (a - 1) / (1 + r) ** (a + b), spec)
        assert value == pytest.approx(beta(a, b), rel=1e-9)
        assert value == pytest.approx(special.beta(a, b), rel=1e-9)


def test_breakpoint_jump(spec):
    # jump at r = 2: int_0^2 r^-1/2 dr + int_2^inf r^-2 dr
    f = lambda r: np.where(r <= 2, r**-0.5, r**-2.0)
    value, _ = integrate_halfline(f, spec, breakpoints=(1.0, 2.0))
    assert value == pytest.approx(2 * math.sqrt(2) + 0.5, rel=1e-10)


def test_matches_scipy_oracle():
    f = lambda r: r**0.3 / (1 + r) ** 2.1 * (2 + np.cos(np.log1p(r)))
    ref, _ = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=500)
    assert integrate_halfline(f)[0] == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("f", [
    lambda r: 1 / r,
    lambda r: 1 / (r * (1 + r)),
    lambda r: r**-0.5,
    lambda r: np.ones_like(r),
])
def test_divergence_detected(spec, f):
    with pytest.raises(DivergenceSuspected):
        integrate_halfline(f, spec)


def test_nonfinite_integrand_detected():
    with pytest.raises(DivergenceSuspected):
        integrate_halfline(lambda r: np.where(np.abs(r - 1) < 0.3, np.inf, np.exp(-r)))


def test_batched_integrand(spec):
    a = np.array([0.5, 1.0, 2.0])
    value, err = integrate_halfline(lambda r: np.exp(-a[:, None] * r[None, :]), spec)
    np.testing.assert_allclose(value, 1 / a, rtol=1e-12)
    assert value.shape == err.shape == (3,)


def test_interval(spec):
    assert integrate_interval(lambda x: x**-0.5, 0.0, 1.0, spec)[0] == pytest.approx(2.0, rel=1e-10)
    assert integrate_interval(np.sin, math.pi, 0.0, spec)[0] == pytest.approx(-2.0, rel=1e-12)
    assert integrate_interval(np.sin, 1.0, 1.0, spec) == (0.0, 0.0)
    with pytest.raises(DomainError):
        integrate_interval(np.sin, 0.0, math.inf, spec)


def test_logline_gaussian(spec):
    assert integrate_logline(lambda t: np.exp(-t * t), spec)[0] == pytest.approx(math.sqrt(math.pi), rel=1e-12)


@pytest.mark.parametrize("n, expected", [(2, 2 * math.pi), (3, 4 * math.pi)])
def test_angular_examples(n, expected):
    assert integrate_angular(lambda c: np.ones_like(c), n) == pytest.approx(expected, rel=1e-14)


def test_angular_odd_vanishes():
    assert abs(integrate_angular(lambda c: c, 3)) < 1e-14


@pytest.mark.parametrize("n", range(1, 7))
def test_angular_total_measure(spec, n):
    assert integrate_angular(lambda c: np.ones_like(c), n, spec) == pytest.approx(sphere_area(n), rel=1e-10)


def test_angular_moments():
    # int_{S^{n-1}} c^2 = omega_{n-1} / n
    for n in range(2, 7):
        assert integrate_angular(lambda c: c**2, n) == pytest.approx(sphere_area(n) / n, rel=1e-12)


def test_angular_split_and_fixed_level_agree():
    g = lambda c: np.exp(c) * (1 + c**2)
    ref = integrate_angular(g, 3)
    assert integrate_angular(g, 3, split=0.3) == pytest.approx(ref, rel=1e-13)
    assert integrate_angular(g, 3, fixed_level=6) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(DomainError):
        integrate_angular(g, 3, split=0.0)


def test_angular_domain():
    with pytest.raises(DomainError):
        integrate_angular(lambda c: c, 0)

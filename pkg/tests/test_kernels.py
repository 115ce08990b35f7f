import json
import math

import numpy as np
import pytest

from normlab.errors import DomainError, EvaluationError, ParseError, UsageError
from normlab.kernels import (
    FactorKernel,
    ProductKernel,
    check_homogeneity,
    custom,
    eval_factor,
    hardy,
    hilbert,
    homogeneity_residual,
    kernel_from_spec,
    load_kernel,
    product,
    random_rotation,
    sphere_average,
    zero_kernel,
)


def test_eval_examples():
    assert eval_factor(hilbert(1), [1.0], [2.0]) == pytest.approx(1 / 3)
    assert eval_factor(hilbert(2), [1.0, 0.0], [0.0, 2.0]) == pytest.approx(0.2)
    assert eval_factor(hardy(1), [2.0], [1.0]) == pytest.approx(0.5)
    assert eval_factor(hardy(1), [1.0], [2.0]) == 0.0


def test_eval_dimension_mismatch():
    with pytest.raises(UsageError):
        eval_factor(hilbert(2), [1.0], [1.0, 0.0])


def test_eval_origin_uses_zero_cosine():
    k = custom(2, "(1 + c) / (s^2 + r^2)")
    assert eval_factor(k, [0.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0)


def test_eval_nan_is_evaluation_error():
    k = custom(1, "log(c - 2) * 0 + 1/(s+r)")
    with pytest.raises(EvaluationError):
        eval_factor(k, [1.0], [1.0])


def test_negative_values_rejected():
    k = custom(1, "-1/(s+r)")
    with pytest.raises(EvaluationError):
        k.evaluate(1.0, 1.0, 1.0)


@pytest.mark.parametrize("k", [hilbert(1), hilbert(2), hilbert(3), hardy(1), hardy(2), hardy(3)])
def test_builtins_homogeneous(k):
    report = check_homogeneity(k, 1000, seed=0)
    assert report.passed
    assert report.max_residual <= 1e-14


def test_non_homogeneous_profile_residual_by_hand():
    # kappa = 1/(s + r^2) at s = r = delta = 2:
    # kappa(4, 4) = 1/20, delta^-1 kappa(2, 2) = 1/12, residual |1/20 - 1/12| / (1/12) = 0.4
    k = custom(1, "1/(s+r^2)")
    assert float(homogeneity_residual(k, 2.0, 2.0, 1.0, 2.0)) == pytest.approx(0.4, rel=1e-14)
    assert not check_homogeneity(k, 100, seed=3).passed


def test_homogeneity_seeded():
    k = custom(2, "(1+c)/(s^2+r^2) + 1e-12*s")
    a = check_homogeneity(k, 50, seed=9)
    b = check_homogeneity(k, 50, seed=9)
    assert a == b


@pytest.mark.parametrize("n", [2, 3, 5])
def test_rotation_invariance(n):
    rng = np.random.default_rng(n)
    k = custom(n, f"(2 + c) / (s^{n} + r^{n} + s*r^{n - 1}*c^2)")
    for _ in range(50):
        R = random_rotation(n, rng)
        assert np.linalg.det(R) == pytest.approx(1.0)
        np.testing.assert_allclose(R @ R.T, np.eye(n), atol=1e-13)
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        assert eval_factor(k, R @ x, R @ y) == pytest.approx(eval_factor(k, x, y), rel=1e-12)


def test_parse_errors_propagate():
    with pytest.raises(ParseError):
        custom(1, "1/(s+r")


def test_factor_validation():
    with pytest.raises(DomainError):
        FactorKernel(n=0, profile=lambda s, r, c: 1.0)
    with pytest.raises(DomainError):
        FactorKernel(n=1, profile=lambda s, r, c: 1.0, breakpoints=(0.0,))
    with pytest.raises(UsageError):
        ProductKernel(())


def test_scaled():
    k = hilbert(1).scaled(3.0)
    assert k.evaluate(1.0, 2.0, 1.0) == pytest.approx(1.0)


def test_sphere_average_matches_direct_rule():
    k = custom(3, "(1 + c^2) / (s^3 + r^3)")
    r = np.array([0.5, 1.0, 2.0])
    # int_{S^2} (1 + c^2) = 4 pi + 4 pi / 3
    expected = (4 * math.pi + 4 * math.pi / 3) / (1 + r**3)
    np.testing.assert_allclose(sphere_average(k, r), expected, rtol=1e-13)
    np.testing.assert_allclose(sphere_average(hilbert(1), r), 2 / (1 + r), rtol=1e-15)


def test_json_round_trip(tmp_path):
    doc = {"factors": [{"n": 1, "type": "hilbert"}, {"n": 2, "type": "hardy"},
                       {"n": 3, "type": "custom", "profile": "1/(s^3+r^3)"}]}
    path = tmp_path / "k.json"
    path.write_text(json.dumps(doc))
    K = load_kernel(path)
    assert K.dims == (1, 2, 3)
    again = kernel_from_spec(K.to_spec())
    assert again.dims == K.dims
    assert again.factors[2].expression == "1/(s^3+r^3)"


@pytest.mark.parametrize("doc", [
    {},
    {"factors": []},
    {"factors": [{"n": 1}]},
    {"factors": [{"n": 0, "type": "hilbert"}]},
    {"factors": [{"n": 1, "type": "custom"}]},
    {"factors": [{"n": 1, "type": "hilbert", "profile": "1/(s+r)"}]},
    {"factors": [{"n": 1, "type": "riesz"}]},
])
def test_bad_specs(doc):
    with pytest.raises(UsageError):
        kernel_from_spec(doc)


def test_load_missing_and_invalid(tmp_path):
    with pytest.raises(UsageError):
        load_kernel(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(UsageError):
        load_kernel(bad)


def test_zero_kernel_and_product():
    K = product(zero_kernel(2), hilbert(1))
    assert K.m == 2 and K.dims == (2, 1)
    assert eval_factor(K.factors[0], [1.0, 0.0], [0.0, 1.0]) == 0.0

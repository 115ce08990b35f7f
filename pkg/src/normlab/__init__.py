"""Sharp L^p -> L^p norms of homogeneous, rotation-invariant product kernels.

The constant is computed by quadrature, confirmed through the multiplicative
group (Haar) route, approached from below by near-extremal functions and a
nonlinear power method, and bounded from above by random test functions.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DivergenceSuspected,
    DomainError,
    EvaluationError,
    NormLabError,
    ParseError,
    RangeError,
    UsageError,
)
from .exponent import LebesgueExponent  # noqa: E402
from .kernels import (  # noqa: E402
    FactorKernel,
    ProductKernel,
    check_homogeneity,
    custom,
    eval_factor,
    hardy,
    hilbert,
    load_kernel,
    product,
    zero_kernel,
)
from .quadrature import QuadratureSpec, integrate_angular, integrate_halfline  # noqa: E402
from .sharp_constant import (  # noqa: E402
    constant_report,
    discrepancy_report,
    factor_constant,
    hilbert_audit,
    hilbert_closed_form,
    mc_constant,
    product_constant,
)
from .specfun import beta, gamma, sphere_area  # noqa: E402

__all__ = [
    "DivergenceSuspected", "DomainError", "EvaluationError", "NormLabError", "ParseError", "RangeError",
    "UsageError", "LebesgueExponent", "FactorKernel", "ProductKernel", "check_homogeneity", "custom",
    "eval_factor", "hardy", "hilbert", "load_kernel", "product", "zero_kernel", "QuadratureSpec",
    "integrate_angular", "integrate_halfline", "constant_report", "discrepancy_report", "factor_constant",
    "hilbert_audit", "hilbert_closed_form", "mc_constant", "product_constant", "beta", "gamma", "sphere_area",
]

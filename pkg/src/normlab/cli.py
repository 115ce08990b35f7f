"""Command-line interface: ``normlab <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
error (suspected divergence, non-finite evaluation, overflow).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import (
    DivergenceSuspected,
    DomainError,
    EvaluationError,
    NormLabError,
    ParseError,
    RangeError,
    UsageError,
)
from .exponent import LebesgueExponent
from .kernels import ProductKernel, custom, hardy, hilbert, load_kernel, zero_kernel
from .quadrature import QuadratureSpec
from .reports import to_csv, to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

_BUILTIN = {"hilbert": hilbert, "hardy": hardy, "zero": zero_kernel}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message} (see '{self.prog} --help')")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"dimensions must be positive integers, got {text!r}")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("human", "json", "csv"), default="human")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--workers", type=int, help="worker threads (default: $NORMLAB_THREADS or CPU count)")
    return common


def _quad_opts() -> argparse.ArgumentParser:
    q = _Parser(add_help=False)
    q.add_argument("--method", choices=("double-exponential", "gauss-legendre"), default="double-exponential")
    q.add_argument("--rel-tol", type=float, default=1e-10)
    q.add_argument("--abs-tol", type=float, default=1e-14)
    q.add_argument("--max-level", type=int, default=12)
    return q


def _kernel_opts() -> argparse.ArgumentParser:
    k = _Parser(add_help=False)
    k.add_argument("--kernel", choices=("hilbert", "hardy", "custom", "zero"),
                   help="built-in factor family applied to every dimension in --n (default hilbert)")
    k.add_argument("--profile", help="kappa(s, r, c) expression for --kernel custom")
    k.add_argument("--kernel-file", help="JSON kernel specification (alternative to --kernel)")
    k.add_argument("--n", type=_int_list, help="comma-separated factor dimensions (default 1)")
    k.add_argument("--m", type=int, help="number of factors; must equal the length of --n")
    k.add_argument("--p", type=float, default=2.0, help="Lebesgue exponent, 1 < p < inf (default 2)")
    k.add_argument("--dual-weight", action="store_true", help="use the |y|^{-n/p'} weight instead of |y|^{-n/p}")
    return k


def build_parser() -> argparse.ArgumentParser:
    common, quad, kern = _common(), _quad_opts(), _kernel_opts()
    parser = _Parser(prog="normlab", description="Sharp L^p norms of homogeneous product kernels.")
    parser.add_argument("--version", action="version", version=f"normlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("constant", parents=[common, quad, kern], help="compute the sharp constant")
    c.add_argument("--mc", action="store_true", help="add the Monte Carlo route")
    c.add_argument("--mc-samples", type=int, default=1_000_000)
    c.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("verify", help="empirical verification suites")
    vsub = v.add_subparsers(dest="suite", required=True, parser_class=_Parser)
    ve = vsub.add_parser("extremal", parents=[common, quad, kern], help="near-extremal ladder R(eps)")
    ve.add_argument("--eps", type=_float_list, default=[0.5, 0.2, 0.1, 0.05])
    ve.add_argument("--threshold", type=float, default=0.95, help="required R(eps_min)/C")
    vu = vsub.add_parser("upper-bound", parents=[common, quad, kern], help="random Rayleigh quotients")
    vu.add_argument("--count", type=int, default=100)
    vu.add_argument("--seed", type=int, default=0)
    vu.add_argument("--grid-half-width", type=float, default=30.0)
    vu.add_argument("--grid-points", type=int, default=4001)
    vh = vsub.add_parser("haar", parents=[common], help="Haar-measure invariance suite")
    vh.add_argument("--seed", type=int, default=0)
    vh.add_argument("--count", type=int, default=100)

    a = sub.add_parser("audit", help="closed-form audits")
    asub = a.add_subparsers(dest="audit", required=True, parser_class=_Parser)
    ah = asub.add_parser("hilbert", parents=[common, quad], help="product Hilbert constant audit")
    ah.add_argument("--m", type=int)
    ah.add_argument("--n", type=_int_list, default=None)
    ah.add_argument("--p", type=float, default=2.0)
    return parser


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(method=args.method, rel_tol=args.rel_tol, abs_tol=args.abs_tol, max_level=args.max_level)


def _dims(args) -> list[int]:
    dims = args.n or ([1] * args.m if args.m else [1])
    if args.m is not None and args.m != len(dims):
        raise UsageError(f"--m {args.m} does not match the {len(dims)} dimension(s) given by --n")
    return dims


def _kernel(args) -> ProductKernel:
    if args.kernel_file:
        if args.kernel or args.profile or args.n or args.m:
            raise UsageError("--kernel-file cannot be combined with --kernel/--profile/--n/--m")
        path = Path(args.kernel_file)
        if not path.is_file():
            raise UsageError(f"kernel file not found: {path}")
        return load_kernel(path)
    kind = args.kernel or "hilbert"
    dims = _dims(args)
    if kind == "custom":
        if not args.profile:
            raise UsageError("--kernel custom requires --profile")
        return ProductKernel(tuple(custom(n, args.profile) for n in dims))
    if args.profile:
        raise UsageError("--profile is only valid with --kernel custom")
    return ProductKernel(tuple(_BUILTIN[kind](n) for n in dims))


def _human_rows(title: str, summary: list[tuple[str, object]], rows: list[dict]) -> str:
    lines = [title]
    for k, v in summary:
        lines.append(f"  {k}: {v}")
    if rows:
        lines.append("  checks:")
        for r in rows:
            status = "PASS" if r["pass"] else "FAIL"
            lines.append(f"    [{status}] {r['route']:<24} value={r['value']:.12g} "
                         f"err_est={r['err_est']:.3g} deviation={r['deviation']:+.3e}")
    return "\n".join(lines) + "\n"


def _cmd_constant(args):
    from .sharp_constant import constant_report

    p = LebesgueExponent(args.p)
    K = _kernel(args)
    report = constant_report(K, p, _spec(args), dual=args.dual_weight,
                             mc_samples=args.mc_samples if args.mc else None, seed=args.seed,
                             workers=args.workers)
    summary = [(f"factor {f.name}", f"{f.constant:.15g} (err_est {f.err_est:.2g})") for f in report.per_factor]
    summary.append(("p, p'", f"{report.p:g}, {report.p_conj:g}"))
    summary.append(("weight", "|y|^{-n/p'}" if report.dual else "|y|^{-n/p}"))
    summary.append(("product constant", f"{report.product_constant:.15g}"))
    rows = report.cross_checks and report.rows()[1:]
    return report.passed, report.to_dict(), report.rows(), _human_rows("sharp constant", summary, rows)


def _cmd_extremal(args):
    from .norm_lab import extremal_ladder
    from .sharp_constant import product_constant

    p = LebesgueExponent(args.p)
    if any(e <= 0 for e in args.eps):
        raise UsageError("--eps values must be positive")
    K = _kernel(args)
    C = product_constant(K, p, _spec(args), dual=args.dual_weight, workers=args.workers).product_constant
    report = extremal_ladder(K, p, args.eps, C, _spec(args), threshold=args.threshold)
    summary = [("constant C", f"{C:.15g}")]
    summary += [(f"R({r.eps:g})/C", f"{r.ratio / C:.10f}") for r in report.results]
    summary += [("nondecreasing", report.monotone), (f"R(eps_min) >= {args.threshold:g} C", report.final_fraction >= args.threshold)]
    return report.passed, report.to_dict(), report.rows(), _human_rows("near-extremal ladder", summary, [])


def _cmd_upper(args):
    from .norm_lab import LogGrid, random_upper_bound_check
    from .sharp_constant import product_constant

    p = LebesgueExponent(args.p)
    K = _kernel(args)
    grid = LogGrid(args.grid_half_width, args.grid_points)
    C = product_constant(K, p, _spec(args), dual=args.dual_weight, workers=args.workers).product_constant
    report = random_upper_bound_check(K, p, grid, seed=args.seed, count=args.count, constant=C, spec=_spec(args))
    summary = [("constant C", f"{C:.15g}"), ("functions", report.count), ("seed", report.seed),
               ("max quotient / C", f"{report.max_quotient / C:.10f}" if C else "n/a"),
               ("exceedances of C(1+1e-3)", report.exceedances)]
    return report.passed, report.to_dict(), report.rows(), _human_rows("random upper-bound check", summary, [])


def _cmd_haar(args):
    from .haar import haar_property_suite

    if args.count < 1:
        raise UsageError("--count must be >= 1")
    report = haar_property_suite(args.seed, args.count)
    summary = [("boxes", report.count), ("seed", report.seed),
               ("scaling failures", report.scale_failures), ("inversion failures", report.invert_failures),
               ("exhaustion (1/k,k)^2 finite and increasing", report.exhaustion_ok)]
    return report.passed, report.to_dict(), report.rows(), _human_rows("Haar measure suite", summary, [])


def _cmd_audit(args):
    from .sharp_constant import hilbert_audit

    p = LebesgueExponent(args.p)
    dims = _dims(args)
    audit = hilbert_audit(dims, p, _spec(args))
    summary = [("dims", ",".join(map(str, dims))), ("p", f"{args.p:g}"),
               ("quadrature oracle", f"{audit.oracle:.15g}"),
               ("derived  prod(omega/n) [G(1/p)G(1/p')]^m", f"{audit.derived:.15g}"),
               ("printed  prod(omega/n) m G(1-1/p)G(1/p)", f"{audit.printed:.15g}"),
               ("F(1/p) iterated 2-D", f"{audit.discrepancy.iterated:.15g}"),
               ("2 B(1-b,b) / B(1-b,b)^2", f"{audit.discrepancy.printed:.15g} / {audit.discrepancy.product_form:.15g}"),
               ("conclusion", audit.conclusion)]
    return audit.passed, audit.to_dict(), audit.rows(), _human_rows("Hilbert constant audit", summary, audit.rows())


def _dispatch(args):
    if args.command == "constant":
        return _cmd_constant(args)
    if args.command == "verify":
        return {"extremal": _cmd_extremal, "upper-bound": _cmd_upper, "haar": _cmd_haar}[args.suite](args)
    return _cmd_audit(args)


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _wants_json(argv) -> bool:
    for i, a in enumerate(argv):
        if a == "--format" and i + 1 < len(argv):
            return argv[i + 1] == "json"
        if a.startswith("--format="):
            return a.split("=", 1)[1] == "json"
    return False


def _error(exc: Exception, code: int, as_json: bool) -> int:
    if isinstance(exc, DomainError) and "1 < p" in str(exc):
        message = f"invalid --p: {exc}"
    else:
        message = str(exc)
    if as_json:
        doc = {"error": {"type": type(exc).__name__, "message": message, "exit_code": code}}
        if isinstance(exc, ParseError) and exc.position is not None:
            doc["error"]["position"] = exc.position
        sys.stdout.write(to_json(doc))
    else:
        print(f"normlab: error: {message}", file=sys.stderr)
    return code


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = _wants_json(argv)
    try:
        args = build_parser().parse_args(argv)
        passed, doc, rows, human = _dispatch(args)
        text = {"json": lambda: to_json(doc), "csv": lambda: to_csv(rows), "human": lambda: human}[args.format]()
        _emit(text, args.output)
        return EXIT_OK if passed else EXIT_FAIL
    except (UsageError, ParseError, DomainError) as exc:
        return _error(exc, EXIT_USAGE, as_json)
    except (DivergenceSuspected, EvaluationError, RangeError) as exc:
        return _error(exc, EXIT_NUMERIC, as_json)
    except NormLabError as exc:  # pragma: no cover - all subclasses handled above
        return _error(exc, EXIT_NUMERIC, as_json)
    except OSError as exc:
        return _error(UsageError(str(exc)), EXIT_USAGE, as_json)


def main() -> None:
    sys.exit(run())

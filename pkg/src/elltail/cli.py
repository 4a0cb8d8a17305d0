"""Command-line entry point.

Subcommands: simulate, estimate, fit-tail, oracle, diagnose.  Outputs are
CSV (one header line) or JSON lines so runs diff cleanly; numeric and data
failures print a machine-readable JSON diagnostic to stderr and exit 1,
usage errors exit 2.  Seeds are always explicit flags, never environment
variables.
"""

from __future__ import annotations

import argparse
import json
import sys

from .conditional import (
    QuadratureSettings,
    approx_theta,
    cond_excess_with_trace,
    cond_quantile_exact,
    marginal_quantile_x,
)
from .diagnostics import fit_gpd_profile, fit_logistic, ks_test_mc
from .errors import ElltailError
from .estimators import PROB_METHODS, QUANTILE_METHODS, fit_all, quantile_hat, theta_hat
from .io import load_model_config, load_pairs_csv
from .simulate import load_sim_config, run_study


def _add_quad_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rel-tol", type=float, default=1e-8, help="quadrature relative tolerance (default 1e-8)")
    p.add_argument("--abs-tol", type=float, default=1e-12, help="quadrature absolute tolerance (default 1e-12)")


def _quad_settings(args) -> QuadratureSettings:
    return QuadratureSettings(rel_tol=args.rel_tol, abs_tol=args.abs_tol)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elltail",
        description="Conditional excess probabilities for bivariate elliptical data "
                    "with rapidly varying radial tails.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a replicate study from a config file")
    p_sim.add_argument("--config", required=True, help="TOML study configuration")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")

    p_est = sub.add_parser("estimate", help="estimate theta(x,y) or a conditional quantile from data")
    p_est.add_argument("--data", required=True, help="CSV file with header x,y")
    p_est.add_argument("--k-frac", type=float, default=0.10,
                       help="fraction of largest reconstructed radii used for the tail fit (default 0.10)")
    p_est.add_argument("--x", type=float, required=True, help="conditioning threshold for X")
    g = p_est.add_mutually_exclusive_group(required=True)
    g.add_argument("--y", type=float, help="estimate P(Y <= y | X > x)")
    g.add_argument("--theta", type=float, help="estimate the conditional theta-quantile of Y")
    p_est.add_argument("--methods", default="m1,m2,m3",
                       help="comma-separated subset of m1,m2,m3 (quantiles: m1,m2); default all")
    _add_quad_flags(p_est)

    p_fit = sub.add_parser("fit-tail", help="print the fitted tail quantities as CSV")
    p_fit.add_argument("--data", required=True, help="CSV file with header x,y")
    p_fit.add_argument("--k-frac", type=float, default=0.10,
                       help="fraction of largest reconstructed radii used for the tail fit (default 0.10)")

    p_or = sub.add_parser("oracle", help="exact conditional excess values for a configured model")
    p_or.add_argument("--model", required=True, help="TOML model file")
    gx = p_or.add_mutually_exclusive_group(required=True)
    gx.add_argument("--x", type=float, help="conditioning threshold for X")
    gx.add_argument("--p", type=float, help="set x at the (1-p)-quantile of the X marginal")
    gy = p_or.add_mutually_exclusive_group(required=True)
    gy.add_argument("--y", type=float, help="evaluate theta(x, y)")
    gy.add_argument("--theta", type=float, help="solve for y with theta(x, y) = theta")
    p_or.add_argument("--trace", action="store_true", help="dump quadrature intermediates to stderr")
    _add_quad_flags(p_or)

    p_di = sub.add_parser("diagnose", help="marginal logistic fit (MC-KS) and tail-shape check")
    p_di.add_argument("--data", required=True, help="CSV file with header x,y")
    p_di.add_argument("--col", choices=("x", "y"), default="x", help="which column to check (default x)")
    p_di.add_argument("--n-mc", type=int, default=999,
                      help="Monte-Carlo replicates for the KS p-value (default 999)")
    p_di.add_argument("--tail-frac", type=float, default=0.15,
                      help="upper-tail fraction for the shape fit (default 0.15, the 15%% largest values)")
    p_di.add_argument("--seed", type=int, required=True, help="seed for the MC replicates")
    return parser


def _cmd_simulate(args) -> int:
    config = load_sim_config(args.config)
    summary = run_study(config, jobs=args.jobs)
    summary.write_outputs(args.out)
    print(f"wrote summary.csv and {len(summary.raw_errors)} error files to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    sample = load_pairs_csv(args.data)
    fit = fit_all(sample, k_fraction=args.k_frac)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    settings = _quad_settings(args)
    allowed = PROB_METHODS if args.y is not None else QUANTILE_METHODS
    bad = [m for m in methods if m not in allowed]
    if bad:
        print(f"elltail estimate: invalid --methods {','.join(bad)}; "
              f"allowed here: {','.join(allowed)}", file=sys.stderr)
        return 2
    flags = []
    if fit.flipped:
        flags.append("flipped")
    if fit.low_threshold(args.x):
        flags.append("low_threshold")
    print("method,estimate,flags")
    for m in methods:
        if args.y is not None:
            val = theta_hat(fit, args.x, args.y, m, settings)
        else:
            val = quantile_hat(fit, args.x, args.theta, m)
        print(f"{m},{val!r},{';'.join(flags)}")
    return 0


def _cmd_fit_tail(args) -> int:
    fit = fit_all(load_pairs_csv(args.data), k_fraction=args.k_frac)
    fields = ["mu_x_hat", "mu_y_hat", "sigma_x_hat", "sigma_y_hat", "rho_hat",
              "beta_hat", "c_hat", "k_n", "n", "flipped"]
    print(",".join(fields))
    print(",".join(repr(getattr(fit, f)) if isinstance(getattr(fit, f), float)
                   else str(getattr(fit, f)) for f in fields))
    return 0


def _cmd_oracle(args) -> int:
    model = load_model_config(args.model)
    settings = _quad_settings(args)
    x = args.x if args.x is not None else marginal_quantile_x(model, args.p, settings)
    if args.y is not None:
        y = args.y
    else:
        y = cond_quantile_exact(model, x, args.theta, settings)
    theta, trace = cond_excess_with_trace(model, x, y, settings)
    try:
        psi = float(model.radial.aux_psi(trace.x_hat))
        approx = {o: approx_theta(model.rho if model.rho >= 0 else -model.rho,
                                  psi, trace.x_hat, trace.y_hat, o)
                  for o in ("first", "corrected", "shifted")}
        if model.rho < 0:
            approx = {o: 1.0 - v for o, v in approx.items()}
    except ElltailError:
        approx = {o: float("nan") for o in ("first", "corrected", "shifted")}
    if args.trace:
        print(json.dumps({
            "x_hat": trace.x_hat, "y_hat": trace.y_hat, "t0": trace.t0, "u0": trace.u0,
            "upper": trace.upper, "lower": trace.lower, "denom": trace.denom,
            "err_upper": trace.err_upper, "err_lower": trace.err_lower,
            "err_denom": trace.err_denom,
        }), file=sys.stderr)
    print("x,y,theta_exact,approx_first,approx_corrected,approx_shifted,quad_error")
    print(",".join(repr(v) for v in (
        x, y, theta, approx["first"], approx["corrected"], approx["shifted"], trace.err_theta)))
    return 0


def _cmd_diagnose(args) -> int:
    sample = load_pairs_csv(args.data)
    data = sample.x if args.col == "x" else sample.y
    loc, scale = fit_logistic(data)
    marginal = ks_test_mc(data, (loc, scale), n_mc=args.n_mc, seed=args.seed)
    shape = fit_gpd_profile(data, tail_fraction=args.tail_frac)
    print(json.dumps({
        "report": "marginal_fit", "family": marginal.family,
        "location": marginal.location, "scale": marginal.scale,
        "ks_statistic": marginal.ks_statistic, "p_value": marginal.p_value,
        "n_mc": marginal.n_mc,
    }))
    print(json.dumps({
        "report": "tail_shape", "threshold": shape.threshold, "n_excess": shape.n_excess,
        "xi_hat": shape.xi_hat, "sigma_hat": shape.sigma_hat,
        "xi_ci_low": shape.xi_ci_low, "xi_ci_high": shape.xi_ci_high,
        "rapid_variation_ok": shape.rapid_variation_ok,
    }))
    print(json.dumps({"report": "elliptical_symmetry", "status": "not_run"}))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "fit-tail": _cmd_fit_tail,
    "oracle": _cmd_oracle,
    "diagnose": _cmd_diagnose,
}


def dispatch(argv=None) -> int:
    """Parse argv and run the selected subcommand.

    Exit status: 0 success, 1 numeric/data failure (JSON diagnostic on
    stderr), 2 usage error (argparse convention).
    """
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ElltailError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        context = getattr(exc, "context", None)
        if context:
            diag["context"] = {k: repr(v) for k, v in context.items()}
        print(json.dumps(diag), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

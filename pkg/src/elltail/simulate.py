"""Simulation study harness: replicate generation, exact targets, summaries.

For each correlation in ``rho_list`` and each tail level p, the study fixes
x at the (1-p)-quantile of the X marginal, computes the exact conditional
quantiles y_theta for every theta on the grid, then fits every replicate
sample and records the errors theta_hat - theta (probability methods) and
y_hat - y_theta (quantile methods).  Errors are pooled over replicates and
summarised by nearest-rank 2.5/50/97.5 percentiles.

Replicate r of correlation-index j draws its sample from the Philox stream
seeded with derive_seed(seed, j, r), so results are byte-identical for any
worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conditional import (
    DEFAULT_QUAD,
    QuadratureSettings,
    cond_quantile_exact,
    marginal_quantile_x,
)
from .errors import (
    ConfigError,
    DomainError,
    ElltailError,
    InsufficientDataError,
    NumericFailure,
)
from .estimators import PROB_METHODS, QUANTILE_METHODS, fit_all, quantile_hat, theta_hat
from .model import EllipticalModel, sample_pairs
from .radial import FAMILIES, make_radial
from .seeding import derive_seed

DEFAULT_THETA_GRID = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)
DEFAULT_P_LEVELS = (1e-3, 1e-4, 1e-5)

#: a study aborts when more than this fraction of replicates fails for a key
MAX_FAILURE_FRACTION = 0.20


@dataclass(frozen=True)
class SimConfig:
    family: str
    params: tuple = ()  # radial parameters as sorted (name, value) pairs
    rho_list: tuple = (0.5, 0.9)
    n: int = 500
    replicates: int = 200
    seed: int = 0
    p_levels: tuple = DEFAULT_P_LEVELS
    theta_grid: tuple = DEFAULT_THETA_GRID
    k_fraction: float = 0.10
    methods: tuple = PROB_METHODS
    quantile_methods: tuple = QUANTILE_METHODS

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.replicates < 1 or self.n < 20:
            raise ConfigError("need replicates >= 1 and n >= 20")
        for p in tuple(self.p_levels) + tuple(self.theta_grid):
            if not 0.0 < p < 1.0:
                raise ConfigError(f"probability out of (0,1): {p}")
        if list(self.theta_grid) != sorted(set(self.theta_grid)):
            raise ConfigError("theta_grid must be strictly increasing")
        if not set(self.methods) <= set(PROB_METHODS):
            raise ConfigError(f"methods must be within {PROB_METHODS}")
        if not set(self.quantile_methods) <= set(QUANTILE_METHODS):
            raise ConfigError(f"quantile_methods must be within {QUANTILE_METHODS}")
        if not 0.0 < self.k_fraction < 1.0:
            raise ConfigError("need k_fraction in (0,1)")

    @property
    def label(self) -> str:
        """Compact family label for file names and the summary column."""
        if not self.params:
            return self.family
        return self.family + "-" + "-".join(f"{k}{v:g}" for k, v in self.params)

    def make_model(self, rho: float) -> EllipticalModel:
        return EllipticalModel(0.0, 0.0, 1.0, 1.0, rho, make_radial(self.family, **dict(self.params)))


@dataclass(frozen=True)
class SummaryRow:
    family: str
    rho: float
    p: float
    theta: float
    method: str
    kind: str  # "prob" or "quantile"
    q025: float
    median: float
    q975: float
    n_fail: int
    y_true: float | None = None


@dataclass
class SimSummary:
    config: SimConfig
    rows: list = field(default_factory=list)
    #: (rho, p, theta, method, kind) -> list of (replicate, error)
    raw_errors: dict = field(default_factory=dict)

    CSV_HEADER = "family,rho,p,theta,method,kind,q025,median,q975,n_fail"

    def csv_lines(self):
        yield self.CSV_HEADER
        for r in self.rows:
            yield ",".join([
                r.family, repr(r.rho), repr(r.p), repr(r.theta), r.method, r.kind,
                repr(r.q025), repr(r.median), repr(r.q975), str(r.n_fail),
            ])

    def write_outputs(self, outdir) -> None:
        """summary.csv, per-key raw error files, and gnuplot-ready curves."""
        os.makedirs(outdir, exist_ok=True)
        label = self.config.label
        with open(os.path.join(outdir, "summary.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(self.csv_lines()) + "\n")
        for (rho, p, theta, method, kind), entries in sorted(self.raw_errors.items()):
            name = f"errors_{label}_rho{rho!r}_p{p!r}_theta{theta!r}_{method}_{kind}.csv"
            with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write("replicate,error\n")
                for rep, err in entries:
                    fh.write(f"{rep},{err!r}\n")
        by_curve = {}
        for r in self.rows:
            by_curve.setdefault((r.rho, r.p, r.kind, r.method), []).append(r)
        for (rho, p, kind, method), rows in sorted(by_curve.items()):
            name = f"fig_{label}_rho{rho!r}_p{p!r}_{kind}_{method}.dat"
            with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="\n") as fh:
                cols = "# theta q025 median q975" + (" y_true" if kind == "quantile" else "")
                fh.write(cols + "\n")
                for r in sorted(rows, key=lambda r: r.theta):
                    line = f"{r.theta!r} {r.q025!r} {r.median!r} {r.q975!r}"
                    if kind == "quantile":
                        line += f" {r.y_true!r}"
                    fh.write(line + "\n")


def summarize_errors(errors) -> tuple[float, float, float]:
    """Nearest-rank (ceil(p*n)) empirical 2.5/50/97.5 percentiles."""
    arr = np.sort(np.asarray(list(errors), dtype=float))
    if arr.size == 0:
        raise InsufficientDataError("no values to summarise")

    def at(p):
        return float(arr[min(math.ceil(p * arr.size), arr.size) - 1])

    return at(0.025), at(0.5), at(0.975)


def _study_targets(config: SimConfig, settings: QuadratureSettings):
    """Exact x thresholds and conditional quantiles, computed once per study."""
    targets = {}
    for rho in config.rho_list:
        model = config.make_model(rho)
        for p in config.p_levels:
            x = marginal_quantile_x(model, p, settings)
            ys = tuple(cond_quantile_exact(model, x, th, settings) for th in config.theta_grid)
            targets[(rho, p)] = (x, ys)
    return targets


def evaluate_replicate(fit, config: SimConfig, targets, settings=DEFAULT_QUAD):
    """Errors of every configured method at every (p, theta) for one fit.

    Returns {(rho, p, theta, method, kind): error or None}; None marks a
    failed evaluation.  Exposed so studies can be rerun with a hand-built
    fit (e.g. true parameters) bypassing estimation.
    """
    out = {}
    for (rho, p), (x, ys) in targets.items():
        for theta, y in zip(config.theta_grid, ys):
            for meth in config.methods:
                try:
                    out[(rho, p, theta, meth, "prob")] = theta_hat(fit, x, y, meth, settings) - theta
                except ElltailError:
                    out[(rho, p, theta, meth, "prob")] = None
            for meth in config.quantile_methods:
                try:
                    out[(rho, p, theta, meth, "quantile")] = quantile_hat(fit, x, theta, meth) - y
                except ElltailError:
                    out[(rho, p, theta, meth, "quantile")] = None
    return out


def _replicate_task(args):
    config, rho_idx, replicate, targets, settings = args
    rho = config.rho_list[rho_idx]
    model = config.make_model(rho)
    seed_r = derive_seed(config.seed, rho_idx, replicate)
    sample = sample_pairs(model, seed_r, config.n)
    sub = {k: v for k, v in targets.items() if k[0] == rho}
    try:
        fit = fit_all(sample, config.k_fraction)
    except ElltailError:
        return replicate, None  # every key fails for this replicate
    return replicate, evaluate_replicate(fit, config, sub, settings)


def run_study(config: SimConfig, jobs: int = 1,
              settings: QuadratureSettings = DEFAULT_QUAD) -> SimSummary:
    """Run the full study; deterministic for fixed config, any job count."""
    if jobs < 1:
        raise DomainError(f"need jobs >= 1, got {jobs}")
    targets = _study_targets(config, settings)
    tasks = [
        (config, rho_idx, rep, targets, settings)
        for rho_idx in range(len(config.rho_list))
        for rep in range(config.replicates)
    ]
    if jobs == 1:
        results = [_replicate_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replicate_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))

    errors = {}
    fails = {}
    all_keys = [
        (rho, p, theta, meth, kind)
        for kind, meths in (("prob", config.methods), ("quantile", config.quantile_methods))
        for rho in config.rho_list
        for p in config.p_levels
        for theta in config.theta_grid
        for meth in meths
    ]
    for key in all_keys:
        errors[key] = []
        fails[key] = 0
    for (_, rho_idx, _, _, _), (rep, res) in zip(tasks, results):
        rho = config.rho_list[rho_idx]
        keys_here = [k for k in all_keys if k[0] == rho]
        if res is None:
            for k in keys_here:
                fails[k] += 1
            continue
        for k in keys_here:
            v = res[(k[0], k[1], k[2], k[3], k[4])]
            if v is None:
                fails[k] += 1
            else:
                errors[k].append((rep, v))

    for k in all_keys:
        if fails[k] > MAX_FAILURE_FRACTION * config.replicates:
            raise NumericFailure(
                "estimator failure rate exceeded 20% for a study key",
                key=k, failures=fails[k], replicates=config.replicates,
            )

    summary = SimSummary(config=config)
    summary.raw_errors = errors
    for kind, meths in (("prob", config.methods), ("quantile", config.quantile_methods)):
        for rho in config.rho_list:
            for p in config.p_levels:
                x, ys = targets[(rho, p)]
                for theta, y in zip(config.theta_grid, ys):
                    for meth in meths:
                        key = (rho, p, theta, meth, kind)
                        errs = [e for _, e in errors[key]]
                        if kind == "prob":
                            q025, med, q975 = summarize_errors(errs)
                            y_true = None
                        else:
                            # report the estimated-quantile distribution itself
                            q025, med, q975 = summarize_errors([e + y for e in errs])
                            y_true = y
                        summary.rows.append(SummaryRow(
                            family=config.label, rho=rho, p=p, theta=theta,
                            method=meth, kind=kind,
                            q025=q025, median=med, q975=q975,
                            n_fail=fails[key], y_true=y_true,
                        ))
    return summary


def load_sim_config(path) -> SimConfig:
    """Build a SimConfig from a TOML study file (see io module docs)."""
    from .io import _load_toml, _RADIAL_PARAM_KEYS

    cfg = _load_toml(path)
    family = cfg.get("family", cfg.get("radial"))
    if not isinstance(family, str):
        raise ConfigError(f"{path}: missing 'family'")
    params = tuple(sorted((k, float(cfg[k])) for k in _RADIAL_PARAM_KEYS if k in cfg))
    kwargs = {}
    for key, cast in [("rho_list", tuple), ("n", int), ("replicates", int), ("seed", int),
                      ("p_levels", tuple), ("theta_grid", tuple), ("k_fraction", float),
                      ("methods", tuple), ("quantile_methods", tuple)]:
        if key in cfg:
            kwargs[key] = cast(cfg[key])
    try:
        return SimConfig(family=family, params=params, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

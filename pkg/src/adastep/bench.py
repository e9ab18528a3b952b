"""Benchmark experiment runner: adaptive vs. uniform vs. classical stepping.

An experiment is described by a JSON config (see README for the schema) and
produces one table of rows written as CSV and JSON lines. Three modes:

* ``uniform``    - solve on a sequence of uniformly refined meshes,
* ``adaptive``   - run the adaptive loop and report one row per iteration,
* ``classical_radau`` - accept/reject embedded step-size control for the
  Radau scheme, one row per requested tolerance.

Outputs are deterministic for a fixed config and seed except for the
``*_seconds`` columns.
"""

import dataclasses
import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import adaptive as adaptive_mod
from .adaptive import AdaptiveConfig
from .error_metrics import ReferenceSolution, h1_error, linf_sampled
from .estimators import estimate, linf_bound
from .problems import make_problem
from .quadrature import LOBATTO, RADAU_RIGHT, build_rule
from .solver import NewtonConfig, SplineSolution, _solve_interval, scheme_tables, solve
from .time_mesh import TimeMesh, bisect, make_initial

__all__ = [
    "ConfigError",
    "StepSizeUnderflow",
    "ExperimentConfig",
    "ResultRow",
    "BaselineStats",
    "parse_scheme",
    "run_experiment",
    "classical_radau_baseline",
    "emit",
    "CSV_COLUMNS",
]

CSV_COLUMNS = (
    "mode",
    "iter",
    "n_intervals",
    "eta_total",
    "h1_error",
    "linf_error",
    "linf_bound",
    "solve_seconds",
    "cumulative_seconds",
)

_SCHEME_ALIASES = {
    "trapezoid": (LOBATTO, 2),
    "crank-nicolson": (LOBATTO, 2),
    "simpson": (LOBATTO, 3),
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class StepSizeUnderflow(RuntimeError):
    """The classical controller reduced the step below 1e-14 of the horizon."""


def parse_scheme(spec):
    """Parse 'family:m' (or an alias like 'trapezoid') into (family, m)."""
    s = str(spec).strip().lower()
    if s in _SCHEME_ALIASES:
        return _SCHEME_ALIASES[s]
    if ":" not in s:
        raise ConfigError(f"scheme must look like 'lobatto:2' or 'radau:3', got {spec!r}")
    fam, _, m = s.partition(":")
    try:
        return fam, int(m)
    except ValueError as exc:
        raise ConfigError(f"bad node count in scheme {spec!r}") from exc


@dataclass
class ResultRow:
    mode: str
    iter: int
    n_intervals: int
    eta_total: Optional[float] = None
    h1_error: Optional[float] = None
    linf_error: Optional[float] = None
    linf_bound: Optional[float] = None
    solve_seconds: Optional[float] = None
    cumulative_seconds: Optional[float] = None

    def to_dict(self):
        return {k: getattr(self, k) for k in CSV_COLUMNS}


@dataclass
class ExperimentConfig:
    problem: str
    scheme: str = "lobatto:2"
    mode: str = "uniform"
    problem_params: dict = field(default_factory=dict)
    initial_intervals: int = 8
    # adaptive
    theta: float = 0.5
    marking: str = "raw"
    max_iterations: Optional[int] = 20
    target_total_estimator: Optional[float] = None
    max_intervals: int = 100_000
    refine_on_newton_failure: bool = False
    # uniform
    uniform_levels: int = 5
    # classical
    classical_rtols: list = field(default_factory=lambda: [1e-4, 1e-6, 1e-8])
    classical_atol: float = 1e-8
    # reporting
    reference: Optional[dict] = None
    sample_step: float = 0.1
    want_linf: bool = True
    out: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("adaptive", "uniform", "classical_radau"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "adaptive" and not 0.0 < self.theta < 1.0:
            raise ConfigError("theta must lie in (0, 1)")
        parse_scheme(self.scheme)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


# -- classical embedded step-size control -------------------------------------


@dataclass
class BaselineStats:
    accepted: int
    rejected: int
    newton_failures: int
    rtol: float
    atol: float


def classical_radau_baseline(problem, rtol, atol, m, max_steps=2_000_000):
    """One-pass accept/reject step-size control for the m-node Radau scheme.

    The error estimate compares the step value against a lower-order
    companion built from the same stage derivatives plus the free explicit
    derivative at the left endpoint (interpolatory weights on those nodes);
    the next step is h * safety * (1/err)^(1/(m+1)) clamped to [0.2, 5] times
    the current one. Steps shrinking below 1e-14 of the horizon abort.

    Returns (SplineSolution over the accepted steps, BaselineStats).
    """
    rule = build_rule(RADAU_RIGHT, m)
    tabs = scheme_tables(rule)
    cfg = NewtonConfig()
    horizon = problem.t_end - problem.t0
    safety, fac_min, fac_max = 0.9, 0.2, 5.0
    expo = 1.0 / (m + 1.0)

    t = problem.t0
    y = problem.y0.copy()
    f0 = problem.f(t, y)
    h = min(0.01 * horizon, 0.01 * (1.0 + float(np.max(np.abs(y)))) / (1.0 + float(np.max(np.abs(f0)))))

    breakpoints = [t]
    nodal_values = []
    accepted = rejected = newton_failures = 0
    lin_cache = {}

    while t < problem.t_end - 1e-14 * max(1.0, abs(problem.t_end)):
        if h < 1e-14 * horizon:
            raise StepSizeUnderflow(
                f"step size {h:.3e} below 1e-14 of the horizon at t={t:.6e} "
                f"(accepted {accepted} steps); problem too stiff for this tolerance"
            )
        if accepted + rejected > max_steps:
            raise RuntimeError("classical controller exceeded the step budget")
        h = min(h, problem.t_end - t)

        Y, _, ok, _, _ = _solve_interval(problem, tabs, t, h, y, cfg, lin_cache)
        if not ok:
            Y, _, ok, _, _ = _solve_interval(
                problem, tabs, t, h, y, dataclasses.replace(cfg, damping=True), lin_cache
            )
        if not ok:
            newton_failures += 1
            rejected += 1
            h *= 0.5
            continue

        ydot = tabs.D @ Y / h  # stage derivatives at the nodal points
        ydot[0] = problem.f(t, y)  # free explicit stage
        y_new = Y[-1]
        y_hat = y + h * (tabs.embedded @ ydot)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean(((y_new - y_hat) / scale) ** 2)))

        if err <= 1.0:
            accepted += 1
            breakpoints.append(t + h)
            nodal_values.append(Y)
            t += h
            y = y_new
        else:
            rejected += 1
        fac = safety * err ** (-expo) if err > 0 else fac_max
        h *= min(fac_max, max(fac_min, fac))

    mesh = TimeMesh.from_breakpoints(np.array(breakpoints))
    spline = SplineSolution(mesh, tabs.nodal.size - 1, tabs.nodal, np.array(nodal_values))
    return spline, BaselineStats(accepted, rejected, newton_failures, rtol, atol)


# -- experiment driver ---------------------------------------------------------


def _resolve_reference(config, problem, rule, finest_mesh, newton):
    spec = dict(config.reference) if config.reference else None
    if spec is None:
        spec = {"kind": "analytic"} if problem.exact is not None else {"kind": "fine-mesh", "extra_levels": 2}
    kind = spec.get("kind", "fine-mesh")
    if kind == "none":
        return None
    if kind == "analytic":
        return ReferenceSolution.from_problem_exact(problem)
    if kind == "classical":
        ref_m = int(spec.get("m", 5))
        ref_rtol = float(spec.get("rtol", 1e-12))
        ref_atol = float(spec.get("atol", ref_rtol))
        spline, _ = classical_radau_baseline(problem, ref_rtol, ref_atol, ref_m)
        return ReferenceSolution.from_spline(spline, tolerance=ref_rtol, provenance=f"classical-radau:{ref_m}")
    if kind == "fine-mesh":
        mesh = finest_mesh
        for _ in range(int(spec.get("extra_levels", 2))):
            mesh = bisect(mesh, range(mesh.n_intervals))
        spline, _ = solve(problem, mesh, rule, newton)
        est = estimate(problem, spline)
        return ReferenceSolution.from_spline(spline, tolerance=est.total, provenance="fine-mesh")
    raise ConfigError(f"unknown reference kind {kind!r}")


def _bound_column(problem, est):
    if problem.lipschitz_L1 is None:
        return None
    val = linf_bound(est, problem.lipschitz_L1, problem.t0, problem.t_end)
    return val if np.isfinite(val) else None


def _error_columns(problem, spline, reference, config):
    h1 = lerr = None
    if reference is not None:
        h1 = h1_error(spline, reference, weight=problem.residual_weight)
        if config.want_linf:
            lerr = linf_sampled(spline, reference, config.sample_step)
    return h1, lerr


def run_experiment(config):
    """Execute one experiment; returns the rows and writes them if ``out`` set."""
    problem = make_problem(config.problem, **config.problem_params)
    family, m = parse_scheme(config.scheme)
    rule = build_rule(family, m)
    newton = NewtonConfig()
    rows = []

    if config.mode == "uniform":
        meshes, splines, ests, times = [], [], [], []
        for level in range(config.uniform_levels):
            n = config.initial_intervals * 2**level
            mesh = make_initial(problem.t0, problem.t_end, n)
            tic = time.perf_counter()
            spline, _ = solve(problem, mesh, rule, newton)
            dt = time.perf_counter() - tic
            meshes.append(mesh)
            splines.append(spline)
            ests.append(estimate(problem, spline))
            times.append(dt)
        reference = _resolve_reference(config, problem, rule, meshes[-1], newton)
        for level, (spline, est, dt) in enumerate(zip(splines, ests, times)):
            h1, lerr = _error_columns(problem, spline, reference, config)
            rows.append(
                ResultRow(
                    mode="uniform",
                    iter=level,
                    n_intervals=spline.mesh.n_intervals,
                    eta_total=est.total,
                    h1_error=h1,
                    linf_error=lerr,
                    linf_bound=_bound_column(problem, est),
                    solve_seconds=dt,
                    cumulative_seconds=dt,
                )
            )

    elif config.mode == "adaptive":
        acfg = AdaptiveConfig(
            theta=config.theta,
            marking_source=config.marking,
            max_iterations=config.max_iterations,
            target_total_estimator=config.target_total_estimator,
            max_intervals=config.max_intervals,
            newton=newton,
            refine_on_newton_failure=config.refine_on_newton_failure,
        )
        meshes, ests = [], []

        def collect(info):
            meshes.append(info.mesh)
            ests.append(info.estimates)
            return False

        result = adaptive_mod.run(problem, make_initial(problem.t0, problem.t_end, config.initial_intervals),
                                  rule, acfg, on_iterate=collect)
        reference = _resolve_reference(config, problem, rule, meshes[-1], newton)
        for row, mesh, est in zip(result.record.rows, meshes, ests):
            spline, _ = solve(problem, mesh, rule, newton)  # deterministic re-solve for error columns
            h1, lerr = _error_columns(problem, spline, reference, config)
            rows.append(
                ResultRow(
                    mode="adaptive",
                    iter=row.iteration,
                    n_intervals=row.n_intervals,
                    eta_total=row.eta_total,
                    h1_error=h1,
                    linf_error=lerr,
                    linf_bound=_bound_column(problem, est),
                    solve_seconds=row.solve_seconds,
                    cumulative_seconds=row.cumulative_seconds,
                )
            )

    else:  # classical_radau
        reference = _resolve_reference(config, problem, rule, None, newton)
        if reference is None:
            raise ConfigError("classical_radau mode needs a reference for its error column")
        for i, rtol in enumerate(config.classical_rtols):
            tic = time.perf_counter()
            spline, stats = classical_radau_baseline(problem, float(rtol), config.classical_atol, m)
            dt = time.perf_counter() - tic
            est = estimate(problem, spline)
            h1, lerr = _error_columns(problem, spline, reference, config)
            rows.append(
                ResultRow(
                    mode="classical_radau",
                    iter=i,
                    n_intervals=stats.accepted,
                    eta_total=est.total,
                    h1_error=h1,
                    linf_error=lerr,
                    linf_bound=_bound_column(problem, est),
                    solve_seconds=dt,
                    cumulative_seconds=dt,
                )
            )

    if config.out:
        emit(rows, "csv", config.out + ".csv")
        emit(rows, "jsonl", config.out + ".jsonl")
    return rows


def emit(rows, fmt, path):
    """Write rows as CSV (fixed header) or JSON lines; identical inputs give
    byte-identical files."""
    if not rows:
        raise ValueError("refusing to emit an empty result table")
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in rows:
            rec = row.to_dict()
            lines.append(",".join("" if rec[c] is None else _fmt(rec[c]) for c in CSV_COLUMNS))
        text = "\n".join(lines) + "\n"
    elif fmt == "jsonl":
        text = "\n".join(json.dumps(row.to_dict()) for row in rows) + "\n"
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)

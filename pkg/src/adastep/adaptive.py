"""The adaptive loop: solve, estimate, mark a minimal set, bisect.

Marking selects a minimal-cardinality set of intervals whose squared
indicators reach a theta fraction of the total (realized by the greedy
descending prefix, which is optimal for this threshold problem). Optionally
the indicators are confidence-modified or switched to the pointwise-bound
variant, and intervals whose Newton iteration failed can be force-marked.
"""

import json
from dataclasses import dataclass, field
from time import perf_counter
from typing import Callable, Optional

import numpy as np

from .estimators import confidence_modify, estimate
from .solver import NewtonConfig, solve
from .time_mesh import bisect

__all__ = [
    "AdaptiveConfig",
    "AdaptiveRecord",
    "AdaptiveResult",
    "IterationRow",
    "IterationInfo",
    "doerfler_mark",
    "run",
    "observed_rate",
]

MARKING_SOURCES = ("raw", "confidence", "linf", "linf-confidence")


@dataclass(frozen=True)
class AdaptiveConfig:
    theta: float = 0.5
    marking_source: str = "raw"
    max_iterations: Optional[int] = None
    target_total_estimator: Optional[float] = None
    max_intervals: int = 2_000_000
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    refine_on_newton_failure: bool = False

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.marking_source not in MARKING_SOURCES:
            raise ValueError(f"marking_source must be one of {MARKING_SOURCES}")
        if self.max_iterations is None and self.target_total_estimator is None and self.max_intervals is None:
            raise ValueError("at least one stop criterion must be set")


@dataclass
class IterationRow:
    iteration: int
    n_intervals: int
    eta_total: float
    marked: int
    newton_failures: int
    solve_seconds: float
    cumulative_seconds: float

    def to_dict(self):
        return {
            "iter": self.iteration,
            "n_intervals": self.n_intervals,
            "eta_total": self.eta_total,
            "marked": self.marked,
            "newton_failures": self.newton_failures,
            "solve_seconds": self.solve_seconds,
            "cumulative_seconds": self.cumulative_seconds,
        }


@dataclass
class AdaptiveRecord:
    """Per-iteration trace; eta_total always reports the raw estimator."""

    rows: list = field(default_factory=list)

    def to_jsonl(self):
        return "\n".join(json.dumps(r.to_dict()) for r in self.rows) + "\n"

    @property
    def n_intervals(self):
        return np.array([r.n_intervals for r in self.rows])

    @property
    def eta_totals(self):
        return np.array([r.eta_total for r in self.rows])


@dataclass(eq=False)
class IterationInfo:
    """Snapshot handed to run()'s per-iteration callback."""

    iteration: int
    mesh: "TimeMesh"
    spline: "SplineSolution"
    estimates: "LocalEstimates"
    marked: np.ndarray
    report: "NewtonReport"


@dataclass(eq=False)
class AdaptiveResult:
    record: AdaptiveRecord
    spline: "SplineSolution"
    estimates: "LocalEstimates"


def doerfler_mark(values_squared, theta):
    """Minimal-cardinality index set with sum >= theta * total.

    Greedy on the descending sort; ties keep the earlier interval first
    (stable sort), so marking is deterministic. An all-zero input marks
    nothing. Returns a sorted index array.
    """
    v = np.asarray(values_squared, dtype=float)
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    if np.any(v < 0):
        raise ValueError("indicator values must be nonnegative")
    total = float(v.sum())
    if total == 0.0:
        return np.array([], dtype=int)
    order = np.argsort(-v, kind="stable")
    csum = np.cumsum(v[order])
    k = min(int(np.searchsorted(csum, theta * total)) + 1, order.size)
    return np.sort(order[:k])


def _marking_values(config, mesh, est):
    sq = est.per_interval**2
    if config.marking_source == "raw":
        return sq
    if config.marking_source == "confidence":
        return confidence_modify(est).per_interval ** 2
    linf_sq = mesh.lengths * sq  # (|T|^(1/2) eta)^2
    if config.marking_source == "linf":
        return linf_sq
    # linf-confidence: prefix-sum scaling applied to the pointwise indicator;
    # keeps stiff runs from endlessly splitting one dominant late interval
    return linf_sq / (1.0 + np.cumsum(linf_sq))


def run(problem, initial_mesh, rule, config, on_iterate: Optional[Callable] = None):
    """Run the adaptive loop until a stop criterion fires.

    Stop criteria (OR-combined): the raw total estimator reaches
    ``target_total_estimator``; ``max_iterations`` iterations are done;
    refining would exceed ``max_intervals``; nothing is marked; or the
    optional ``on_iterate(info)`` callback returns a truthy value. Newton
    failures never abort the loop; with ``refine_on_newton_failure`` the
    failing intervals are marked in addition to the Doerfler set.
    """
    mesh = initial_mesh
    record = AdaptiveRecord()
    cumulative = 0.0
    iteration = 0
    while True:
        tic = perf_counter()
        spline, report = solve(problem, mesh, rule, config.newton)
        solve_seconds = perf_counter() - tic
        cumulative += solve_seconds

        est = estimate(problem, spline)
        marked = doerfler_mark(_marking_values(config, mesh, est), config.theta)
        if config.refine_on_newton_failure and report.n_failures:
            marked = np.union1d(marked, np.flatnonzero(~report.converged))

        record.rows.append(
            IterationRow(
                iteration=iteration,
                n_intervals=mesh.n_intervals,
                eta_total=est.total,
                marked=int(marked.size),
                newton_failures=report.n_failures,
                solve_seconds=solve_seconds,
                cumulative_seconds=cumulative,
            )
        )

        stop = False
        if on_iterate is not None:
            stop = bool(on_iterate(IterationInfo(iteration, mesh, spline, est, marked, report)))
        if config.target_total_estimator is not None and est.total <= config.target_total_estimator:
            stop = True
        if config.max_iterations is not None and iteration + 1 >= config.max_iterations:
            stop = True
        if marked.size == 0:
            stop = True
        if config.max_intervals is not None and mesh.n_intervals + marked.size > config.max_intervals:
            stop = True
        if stop:
            return AdaptiveResult(record, spline, est)

        mesh = bisect(mesh, marked)
        iteration += 1


def observed_rate(record_or_counts, etas=None):
    """Least-squares slope of log(eta) against log(#intervals).

    Fitted over the last half of the data points; needs at least four points.
    Accepts an AdaptiveRecord or two parallel arrays.
    """
    if etas is None:
        counts = record_or_counts.n_intervals
        etas = record_or_counts.eta_totals
    else:
        counts = np.asarray(record_or_counts, dtype=float)
        etas = np.asarray(etas, dtype=float)
    counts = np.asarray(counts, dtype=float)
    etas = np.asarray(etas, dtype=float)
    if counts.size != etas.size or counts.size < 4:
        raise ValueError("observed_rate needs at least 4 data points")
    counts = counts[counts.size // 2 :]
    etas = etas[etas.size // 2 :]
    keep = (etas > 0) & (counts > 0)
    if keep.sum() < 2:
        raise ValueError("not enough positive data points for a rate fit")
    return float(np.polyfit(np.log(counts[keep]), np.log(etas[keep]), 1)[0])

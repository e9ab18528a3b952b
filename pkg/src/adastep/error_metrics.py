"""Error norms between discrete solutions and references.

The workhorse is the H1 seminorm ||d/dt (a - ref)||_{L2} evaluated by Gauss
quadrature on the union of both breakpoint sets, so piecewise-polynomial
operands are integrated without quadrature crimes. The pointwise metric
samples a uniform grid (default spacing 1/10) and takes the maximum
Euclidean norm of the difference.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .quadrature import GAUSS_LEGENDRE, build_rule
from .problems import NormWeight

__all__ = ["ReferenceSolution", "h1_error", "linf_sampled"]


@dataclass(eq=False)
class ReferenceSolution:
    """Analytic solution or a discrete solution on a much finer mesh.

    ``tolerance`` records how accurate the reference itself is believed to
    be; comparisons below that level are not meaningful.
    """

    kind: str
    value_fn: Callable
    deriv_fn: Callable
    tolerance: float = 0.0
    provenance: str = ""
    spline: Optional[object] = None

    @classmethod
    def from_callable(cls, value_fn, deriv_fn, tolerance=0.0, provenance="analytic"):
        return cls("analytic", value_fn, deriv_fn, tolerance, provenance)

    @classmethod
    def from_problem_exact(cls, problem):
        if problem.exact is None or problem.exact_deriv is None:
            raise ValueError(f"problem {problem.name!r} has no analytic solution attached")
        return cls("analytic", problem.exact, problem.exact_deriv, 0.0, f"exact:{problem.name}")

    @classmethod
    def from_spline(cls, spline, tolerance, provenance="fine-mesh"):
        return cls("spline", spline.value, spline.deriv1, tolerance, provenance, spline=spline)

    def _call(self, fn, t):
        # analytic callables take a scalar t and return a (d,) vector
        if self.kind == "spline":
            return fn(t)
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.stack([np.atleast_1d(np.asarray(fn(ti), dtype=float)) for ti in t_arr])
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def value(self, t):
        return self._call(self.value_fn, t)

    def deriv1(self, t):
        return self._call(self.deriv_fn, t)


def _union_breakpoints(a, ref):
    bps = a.mesh.breakpoints
    if ref.spline is not None:
        bps = np.union1d(bps, ref.spline.mesh.breakpoints)
    return bps


def h1_error(a, ref, weight=None, n_gauss=None):
    """Weighted L2 norm of the derivative difference over the common horizon."""
    if ref.spline is not None:
        ra, rb = ref.spline.mesh.t0, ref.spline.mesh.t_end
        if abs(ra - a.mesh.t0) > 1e-12 or abs(rb - a.mesh.t_end) > 1e-9 * max(1.0, abs(rb)):
            raise ValueError("solution and reference must share the time horizon")
    weight = weight or NormWeight()
    degree = max(a.degree, ref.spline.degree if ref.spline is not None else 0)
    if n_gauss is None:
        n_gauss = degree + 3  # exactness 2p+5 >= 2p+1
    rule = build_rule(GAUSS_LEGENDRE, n_gauss)

    bps = _union_breakpoints(a, ref)
    h = np.diff(bps)
    pts = (bps[:-1, None] + rule.nodes[None, :] * h[:, None]).ravel()
    diff = a.deriv1(pts) - ref.deriv1(pts)
    contrib = weight.norm_sq(diff).reshape(h.size, rule.m)
    return float(np.sqrt(np.sum(h * (contrib @ rule.weights))))


def linf_sampled(a, ref, sample_step=0.1):
    """Max Euclidean norm of a - ref over the grid t0 + k*sample_step."""
    if sample_step <= 0:
        raise ValueError("sample_step must be positive")
    t0, t_end = a.mesh.t0, a.mesh.t_end
    k_max = int(np.floor((t_end - t0) / sample_step + 1e-9))
    ts = t0 + sample_step * np.arange(k_max + 1)
    diff = a.value(ts) - ref.value(ts)
    return float(np.max(np.linalg.norm(np.atleast_2d(diff), axis=-1)))

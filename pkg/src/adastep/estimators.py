"""Element-wise residual error estimation and the associated error bounds.

The local indicator of an interval T is

    eta(T) = |T| * || d/dt F(., y) + J_F(., y) y' - y'' ||_{L2(T)}

in the problem's residual weighting; the integrand is the time derivative of
the defect y' - F(t, y). The total estimator bounds the H1 error up to the
closed-form reliability constant, and |T|^(1/2) eta(T) gives a pointwise
bound after scaling with exp(L1 (t_end - t0)).
"""

import json
from dataclasses import dataclass
from math import exp, sqrt

import numpy as np

from .quadrature import GAUSS_LEGENDRE, build_rule, lagrange_eval

__all__ = [
    "LocalEstimates",
    "estimate",
    "confidence_modify",
    "linf_indicator",
    "reliability_constant",
    "linf_bound",
]


@dataclass(frozen=True, eq=False)
class LocalEstimates:
    """Per-interval estimator values eta(T) >= 0 on a mesh."""

    mesh: "TimeMesh"
    per_interval: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.per_interval, dtype=float)
        if vals.size != self.mesh.n_intervals:
            raise ValueError("one estimate per interval required")
        if np.any(vals < 0):
            raise ValueError("estimates must be nonnegative")
        vals.flags.writeable = False
        object.__setattr__(self, "per_interval", vals)

    @property
    def total(self):
        return float(np.sqrt(np.sum(self.per_interval**2)))

    def to_json(self):
        """JSON object with the mesh breakpoints and the per-interval values."""
        return json.dumps(
            {"breakpoints": self.mesh.breakpoints.tolist(), "eta": self.per_interval.tolist()}
        )


def estimate(problem, spline, rule_for_norms=None):
    """Per-interval residual estimator of a discrete solution.

    The L2(T) integrals are evaluated with a Gauss rule of p+3 points
    (exactness 2p+5, beyond the required 2p+2), where p is the spline degree.
    """
    if rule_for_norms is None:
        rule_for_norms = build_rule(GAUSS_LEGENDRE, spline.degree + 3)
    mesh = spline.mesh
    h = mesh.lengths
    nodes, gw = rule_for_norms.nodes, rule_for_norms.weights

    B0, B1, B2 = lagrange_eval(spline.nodal_points, nodes)  # (n_nodal, n_g)
    V1 = np.einsum("ikd,kg->igd", spline.values, B1) / h[:, None, None]
    V2 = np.einsum("ikd,kg->igd", spline.values, B2) / (h**2)[:, None, None]

    if problem.is_linear and problem.autonomous:
        J0 = problem.jac_y(problem.t0, problem.y0)
        integrand = V1 @ J0.T - V2
    else:
        V0 = np.einsum("ikd,kg->igd", spline.values, B0)
        T = mesh.breakpoints[:-1, None] + nodes[None, :] * h[:, None]
        integrand = np.empty_like(V1)
        for i in range(mesh.n_intervals):
            for g in range(nodes.size):
                t, y = T[i, g], V0[i, g]
                integrand[i, g] = problem.f_t(t, y) + problem.jac_y(t, y) @ V1[i, g] - V2[i, g]

    norm_sq = problem.residual_weight.norm_sq(integrand)  # (n, n_g)
    eta_sq = h**3 * (norm_sq @ gw)
    return LocalEstimates(mesh, np.sqrt(np.maximum(eta_sq, 0.0)))


def confidence_modify(est):
    """Scale each squared indicator by the inclusive prefix sum of its mesh.

    eta~(T_i)^2 = eta(T_i)^2 / (1 + sum_{j<=i} eta(T_j)^2), so large
    contributions early in time reduce the weight of everything later. Use
    the result for marking only; totals are reported from the raw estimator.
    """
    sq = est.per_interval**2
    modified = sq / (1.0 + np.cumsum(sq))
    return LocalEstimates(est.mesh, np.sqrt(modified))


def linf_indicator(est):
    """Pointwise-bound indicators |T|^(1/2) eta(T)."""
    return np.sqrt(est.mesh.lengths) * est.per_interval


def reliability_constant(L1, t0, t_end):
    """Constant C_rel with ||y - y_T||_{H1} <= C_rel * eta for Lipschitz F.

    C_rel^2 = (t_end - t0) * (2 L1^2 exp(2 L1 (t_end - t0)) (t_end - t0)^2 + 2).
    """
    if L1 < 0 or not t_end > t0:
        raise ValueError("need L1 >= 0 and t_end > t0")
    dt = t_end - t0
    return sqrt(dt * (2.0 * L1**2 * exp(2.0 * L1 * dt) * dt**2 + 2.0))


def linf_bound(est, L1, t0, t_end):
    """Pointwise error bound exp(L1 (t_end - t0)) * max |T|^(1/2) eta(T)."""
    if L1 < 0:
        raise ValueError("need L1 >= 0")
    indicators = linf_indicator(est)
    peak = float(np.max(indicators)) if indicators.size else 0.0
    growth = L1 * (t_end - t0)
    if growth > 700.0:  # exp overflow; the bound is +inf for practical purposes
        return float("inf") if peak > 0 else 0.0
    return exp(growth) * peak

"""Interval-by-interval solver for the continuous piecewise-polynomial scheme.

The ansatz on each interval is the polynomial interpolating nodal values at
the quadrature nodes (plus the left endpoint when the rule does not contain
it); the discrete equations come from testing the defect y' - F(t, y) with
the Lagrange polynomials on the non-left quadrature nodes and applying the
rule itself to the integrals. This reproduces the classical schemes exactly:
trapezoid -> Crank-Nicolson, Simpson -> three-stage Lobatto IIIA, an m-point
right-Radau rule -> the m-stage Radau IIA collocation method (for rules
without a left endpoint node the test system forces the defect to vanish at
every quadrature node).

The ansatz degree is therefore m-1 for Lobatto rules and m for Radau/Gauss
rules, where m is the number of quadrature nodes.
"""

import dataclasses
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .quadrature import build_rule, lagrange_eval
from .time_mesh import TimeMesh

__all__ = [
    "NewtonConfig",
    "NewtonReport",
    "SplineSolution",
    "solve",
    "residual",
    "discrete_residual_means",
    "interval_equations",
    "ansatz_degree",
]


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 25
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    damping: bool = False


@dataclass(eq=False)
class NewtonReport:
    """Per-interval Newton diagnostics for one solve."""

    iterations: np.ndarray
    converged: np.ndarray
    residuals: np.ndarray
    tolerances: np.ndarray

    @property
    def n_failures(self):
        return int(np.sum(~self.converged))

    @property
    def all_converged(self):
        return bool(np.all(self.converged))


@dataclass(frozen=True, eq=False)
class SplineSolution:
    """Continuous piecewise polynomial of degree p with nodal coefficients.

    ``values[i, k]`` is the solution vector at reference node
    ``nodal_points[k]`` of interval i; ``nodal_points[0]`` is always 0, so
    continuity is the identity values[i+1, 0] == right value of interval i.
    """

    mesh: TimeMesh
    degree: int
    nodal_points: np.ndarray
    values: np.ndarray

    def _eval(self, t, order):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        bps = self.mesh.breakpoints
        idx = np.clip(np.searchsorted(bps, t_arr, side="right") - 1, 0, self.mesh.n_intervals - 1)
        h = bps[idx + 1] - bps[idx]
        s = (t_arr - bps[idx]) / h
        basis = lagrange_eval(self.nodal_points, s)[order]
        out = np.einsum("kp,pkd->pd", basis, self.values[idx])
        if order:
            out = out / h[:, None] ** order
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def value(self, t):
        return self._eval(t, 0)

    def deriv1(self, t):
        return self._eval(t, 1)

    def deriv2(self, t):
        return self._eval(t, 2)

    def right_value(self, i=-1):
        """Solution vector at the right endpoint of interval i."""
        vals, _, _ = lagrange_eval(self.nodal_points, 1.0)
        return self.values[i].T @ vals[:, 0]


def ansatz_degree(rule):
    """Polynomial degree the scheme uses for the given quadrature rule."""
    return rule.m - 1 if rule.includes_zero else rule.m


@dataclass(frozen=True, eq=False)
class _SchemeTables:
    nodal: np.ndarray
    D: np.ndarray          # D[i, k] = L_k'(nodal_i) on the reference interval
    alpha: np.ndarray      # coupling of the left-node defect into equation j
    quad_weights: np.ndarray
    embedded: np.ndarray   # interpolatory weights on the nodal points


@lru_cache(maxsize=None)
def _scheme_tables_cached(family, m):
    rule = build_rule(family, m)
    if rule.includes_zero:
        nodal = rule.nodes
        test_basis_at_zero = lagrange_eval(nodal[1:], 0.0)[0][:, 0]
        alpha = rule.weights[0] * test_basis_at_zero / rule.weights[1:]
    else:
        nodal = np.concatenate([[0.0], rule.nodes])
        alpha = np.zeros(rule.m)
    D = lagrange_eval(nodal, nodal)[1].T
    # lower-order companion quadrature on the nodal points minus the last one
    # (the full interpolatory rule on all nodal points reproduces the step
    # value exactly and would give a zero error estimate)
    sub = nodal[:-1]
    vander = sub[None, :] ** np.arange(sub.size)[:, None]
    embedded = np.zeros(nodal.size)
    embedded[:-1] = np.linalg.solve(vander, 1.0 / np.arange(1, sub.size + 1))
    return _SchemeTables(nodal, D, alpha, rule.weights, embedded)


def scheme_tables(rule):
    return _scheme_tables_cached(rule.family, rule.m)


def _system(problem, tabs, a, h, Y):
    """Discrete equations E_j = G_j + alpha_j G_0 with G_i = y'(s_i) - F."""
    t_nodes = a + tabs.nodal * h
    G = tabs.D @ Y / h
    lo = 0 if tabs.alpha.any() else 1
    for i in range(lo, tabs.nodal.size):
        G[i] -= problem.f(t_nodes[i], Y[i])
    return G[1:] + tabs.alpha[:, None] * G[0]


def _matrix(problem, tabs, a, h, Y):
    p = tabs.nodal.size - 1
    d = problem.dim
    Deff = tabs.D[1:, 1:] + tabs.alpha[:, None] * tabs.D[0, 1:]
    A = np.kron(Deff, np.eye(d)) / h
    for j in range(p):
        t_j = a + tabs.nodal[j + 1] * h
        A[j * d : (j + 1) * d, j * d : (j + 1) * d] -= problem.jac_y(t_j, Y[j + 1])
    return A


def _residual_norm(E):
    r = np.max(np.abs(E))
    return r if np.isfinite(r) else np.inf


def _solve_interval(problem, tabs, a, h, y_left, cfg, lin_cache):
    n_nodal = tabs.nodal.size
    p = n_nodal - 1
    d = problem.dim
    Y = np.repeat(y_left[None, :], n_nodal, axis=0)

    f_left = problem.f(a, y_left)
    scale = max(1.0, float(np.max(np.abs(f_left))))
    tol = cfg.abs_tol + cfg.rel_tol * scale

    if problem.is_linear:
        key = h
        if key not in lin_cache:
            lin_cache[key] = lu_factor(_matrix(problem, tabs, a, h, Y))
        E = _system(problem, tabs, a, h, Y)
        Y[1:] += lu_solve(lin_cache[key], -E.reshape(-1)).reshape(p, d)
        res = _residual_norm(_system(problem, tabs, a, h, Y))
        return Y, 1, res <= tol, res, tol

    E = _system(problem, tabs, a, h, Y)
    res = _residual_norm(E)
    iters = 0
    converged = res <= tol
    while not converged and iters < cfg.max_iter:
        try:
            step = np.linalg.solve(_matrix(problem, tabs, a, h, Y), -E.reshape(-1)).reshape(p, d)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        iters += 1
        if cfg.damping:
            lam, best_res, best_Y = 1.0, np.inf, None
            for _ in range(10):
                Y_try = Y.copy()
                Y_try[1:] += lam * step
                E_try = _system(problem, tabs, a, h, Y_try)
                r_try = _residual_norm(E_try)
                if r_try < best_res:
                    best_res, best_Y, best_E = r_try, Y_try, E_try
                if r_try <= max(tol, (1.0 - 1e-4 * lam) * res):
                    break
                lam *= 0.5
            if best_Y is None or not best_res < res:
                break
            Y, E, res = best_Y, best_E, best_res
        else:
            Y[1:] += step
            E = _system(problem, tabs, a, h, Y)
            res = _residual_norm(E)
        converged = res <= tol
    if not np.all(np.isfinite(Y)):
        Y = np.repeat(y_left[None, :], n_nodal, axis=0)
        res = _residual_norm(_system(problem, tabs, a, h, Y))
        converged = False
    return Y, iters, converged, res, tol


def solve(problem, mesh, rule, newton=None):
    """Solve the discrete problem on ``mesh`` with the scheme induced by ``rule``.

    Marches left to right; each interval inherits its left value from the
    previous one and solves the nonlinear nodal system by Newton iteration
    with the analytic Jacobian. A non-converged interval is reported in the
    NewtonReport (after one damped retry) but does not abort the sweep.

    Returns (SplineSolution, NewtonReport).
    """
    cfg = newton or NewtonConfig()
    if abs(mesh.t0 - problem.t0) > 1e-12 or abs(mesh.t_end - problem.t_end) > 1e-9 * max(1.0, abs(problem.t_end)):
        raise ValueError("mesh does not span the problem horizon")
    tabs = scheme_tables(rule)
    n = mesh.n_intervals
    n_nodal = tabs.nodal.size
    d = problem.dim

    values = np.empty((n, n_nodal, d))
    iterations = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    residuals = np.zeros(n)
    tolerances = np.zeros(n)
    right_weights = lagrange_eval(tabs.nodal, 1.0)[0][:, 0]

    lin_cache = {}
    y_left = problem.y0.copy()
    for i in range(n):
        a, b = mesh.breakpoints[i], mesh.breakpoints[i + 1]
        Y, its, ok, res, tol = _solve_interval(problem, tabs, a, b - a, y_left, cfg, lin_cache)
        if not ok and not cfg.damping and not problem.is_linear:
            Y, its, ok, res, tol = _solve_interval(
                problem, tabs, a, b - a, y_left, dataclasses.replace(cfg, damping=True), lin_cache
            )
        values[i] = Y
        iterations[i], converged[i], residuals[i], tolerances[i] = its, ok, res, tol
        y_left = Y.T @ right_weights

    spline = SplineSolution(mesh, n_nodal - 1, tabs.nodal, values)
    report = NewtonReport(iterations, converged, residuals, tolerances)
    return spline, report


def residual(problem, spline, t):
    """Pointwise defect R(t) = y'(t) - F(t, y(t)) of the discrete solution."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    vals = spline.value(t_arr)
    ders = spline.deriv1(t_arr)
    out = np.empty_like(ders)
    for i, ti in enumerate(t_arr):
        out[i] = ders[i] - problem.f(ti, vals[i])
    return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out


def discrete_residual_means(problem, spline, rule):
    """Per-interval integral of the defect in the scheme's own quadrature.

    Testing with a constant function shows these vanish at Newton
    convergence: |Q_T[R]| <= newton tolerance * |T| for every interval.
    Returns an array of shape (n_intervals, d).
    """
    bps = spline.mesh.breakpoints
    h = np.diff(bps)
    B0, B1, _ = lagrange_eval(spline.nodal_points, rule.nodes)
    out = np.zeros((spline.mesh.n_intervals, problem.dim))
    for i in range(spline.mesh.n_intervals):
        # evaluate on this interval's own polynomial: at shared breakpoints the
        # derivative jumps, so the global evaluator would pick the wrong side
        yv = B0.T @ spline.values[i]
        yd = B1.T @ spline.values[i] / h[i]
        defect = np.array([yd[g] - problem.f(bps[i] + rule.nodes[g] * h[i], yv[g]) for g in range(rule.m)])
        out[i] = h[i] * (rule.weights @ defect)
    return out


def interval_equations(problem, spline, rule, i):
    """Re-evaluate the discrete test equations of interval i on the spline."""
    tabs = scheme_tables(rule)
    a, b = spline.mesh.interval(i)
    return _system(problem, tabs, a, b - a, spline.values[i])

import numpy as np
import pytest

from adastep.error_metrics import ReferenceSolution, h1_error, linf_sampled
from adastep.problems import linear_test
from adastep.quadrature import LOBATTO, build_rule
from adastep.solver import SplineSolution, solve
from adastep.time_mesh import TimeMesh, make_initial


def _linear_spline(breakpoints, nodal_values):
    """Piecewise linear spline through the given breakpoint values."""
    bps = np.asarray(breakpoints, dtype=float)
    vals = np.asarray(nodal_values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    mesh = TimeMesh.from_breakpoints(bps)
    coeff = np.stack([vals[:-1], vals[1:]], axis=1)
    return SplineSolution(mesh, 1, np.array([0.0, 1.0]), coeff)


def _scale(spline, factor):
    return SplineSolution(spline.mesh, spline.degree, spline.nodal_points, factor * spline.values)


def test_identical_inputs_give_zero():
    sp = _linear_spline([0.0, 0.5, 1.0], [1.0, 2.0, 0.5])
    ref = ReferenceSolution.from_spline(sp, 0.0)
    assert h1_error(sp, ref) == 0.0
    assert linf_sampled(sp, ref) == 0.0


def test_constant_offset_blind_in_h1_visible_in_linf():
    a = _linear_spline([0.0, 0.5, 1.0], [1.0, 2.0, 0.5])
    b = _linear_spline([0.0, 0.5, 1.0], [4.0, 5.0, 3.5])
    ref = ReferenceSolution.from_spline(b, 0.0)
    assert h1_error(a, ref) < 1e-13
    assert abs(linf_sampled(a, ref) - 3.0) < 1e-13


def test_unit_slope_against_zero_reference():
    a = _linear_spline([0.0, 1.0], [0.0, 1.0])
    zero = ReferenceSolution.from_callable(lambda t: np.zeros(1), lambda t: np.zeros(1))
    assert abs(h1_error(a, zero) - 1.0) < 1e-14


def test_h1_union_mesh_handles_incompatible_breakpoints():
    # derivative mismatch integrated exactly only if both meshes contribute cuts
    a = _linear_spline([0.0, 0.4, 1.0], [0.0, 0.8, 0.3])
    b = _linear_spline([0.0, 0.7, 1.0], [0.0, 0.35, 1.0])
    ref = ReferenceSolution.from_spline(b, 0.0)
    pieces = [(0.0, 0.4), (0.4, 0.7), (0.7, 1.0)]
    exact_sq = 0.0
    for lo, hi in pieces:
        mid = 0.5 * (lo + hi)
        da = a.deriv1(mid)
        db = b.deriv1(mid)
        exact_sq += (hi - lo) * float((da - db) @ (da - db))
    assert abs(h1_error(a, ref) - np.sqrt(exact_sq)) < 1e-13


def test_h1_triangle_inequality_and_homogeneity():
    rng = np.random.default_rng(17)
    for _ in range(10):
        bps_a = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 3)), [1.0]])
        bps_b = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 2)), [1.0]])
        a = _linear_spline(bps_a, rng.normal(size=5))
        b = _linear_spline(bps_b, rng.normal(size=4))
        zero_bps = np.array([0.0, 1.0])
        zero = _linear_spline(zero_bps, np.zeros(2))
        d_ab = h1_error(a, ReferenceSolution.from_spline(b, 0.0))
        d_a0 = h1_error(a, ReferenceSolution.from_spline(zero, 0.0))
        d_b0 = h1_error(b, ReferenceSolution.from_spline(zero, 0.0))
        assert d_ab <= d_a0 + d_b0 + 1e-10
        c = float(rng.uniform(0.5, 3.0))
        d_scaled = h1_error(_scale(a, c), ReferenceSolution.from_spline(_scale(b, c), 0.0))
        assert abs(d_scaled - c * d_ab) < 1e-10 * max(1.0, d_ab)


def test_h1_requires_matching_horizon():
    a = _linear_spline([0.0, 1.0], [0.0, 1.0])
    b = _linear_spline([0.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        h1_error(a, ReferenceSolution.from_spline(b, 0.0))


def test_linf_sampled_matches_direct_evaluation():
    problem = linear_test(-1.0)
    spline, _ = solve(problem, make_initial(0.0, 1.0, 16), build_rule(LOBATTO, 2))
    ref = ReferenceSolution.from_problem_exact(problem)
    step = 0.1
    ts = np.arange(0, 11) * step
    direct = max(abs(spline.value(t)[0] - np.exp(-t)) for t in ts)
    assert abs(linf_sampled(spline, ref, step) - direct) < 1e-15
    with pytest.raises(ValueError):
        linf_sampled(spline, ref, 0.0)


def test_reference_refinement_changes_error_below_tolerance():
    problem = linear_test(-1.0)
    rule = build_rule(LOBATTO, 2)
    coarse, _ = solve(problem, make_initial(0.0, 1.0, 32), rule)
    fine1, _ = solve(problem, make_initial(0.0, 1.0, 1024), rule)
    fine2, _ = solve(problem, make_initial(0.0, 1.0, 2048), rule)
    # the fine solves are accurate to ~C/n; use a generous recorded tolerance
    tol = 5.0 / 1024
    e1 = h1_error(coarse, ReferenceSolution.from_spline(fine1, tol))
    e2 = h1_error(coarse, ReferenceSolution.from_spline(fine2, tol))
    assert abs(e1 - e2) < tol


def test_reference_from_problem_requires_exact():
    from adastep.problems import van_der_pol

    with pytest.raises(ValueError):
        ReferenceSolution.from_problem_exact(van_der_pol(1.0))

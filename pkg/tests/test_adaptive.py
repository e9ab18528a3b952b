from itertools import combinations

import numpy as np
import pytest

from adastep.adaptive import (
    AdaptiveConfig,
    AdaptiveRecord,
    IterationRow,
    doerfler_mark,
    observed_rate,
    run,
)
from adastep.estimators import estimate
from adastep.problems import NormWeight, OdeProblem, linear_test, van_der_pol, make_problem
from adastep.quadrature import LOBATTO, RADAU_RIGHT, build_rule
from adastep.solver import NewtonConfig, solve
from adastep.time_mesh import is_refinement_of, make_initial


def brute_force_min_cardinality(values, theta):
    total = values.sum()
    target = theta * total
    n = len(values)
    for k in range(n + 1):
        for subset in combinations(range(n), k):
            if values[list(subset)].sum() >= target:
                return k
    return n


def test_doerfler_single_dominant():
    marked = doerfler_mark(np.array([4.0, 1.0, 1.0, 1.0, 1.0]), 0.5)
    np.testing.assert_array_equal(marked, [0])


def test_doerfler_theta_near_one_marks_all_nonzero():
    values = np.array([1.0, 0.0, 2.0, 0.0, 3.0])
    marked = doerfler_mark(values, 0.999999)
    np.testing.assert_array_equal(marked, [0, 2, 4])


def test_doerfler_ties_minimal_cardinality():
    marked = doerfler_mark(np.array([1.0, 1.0, 1.0, 1.0]), 0.5)
    assert marked.size == 2


def test_doerfler_all_zero_marks_nothing():
    assert doerfler_mark(np.zeros(5), 0.7).size == 0


def test_doerfler_tie_break_prefers_earlier_intervals():
    marked = doerfler_mark(np.array([2.0, 5.0, 5.0, 2.0]), 0.6)
    np.testing.assert_array_equal(marked, [1, 2])


def test_doerfler_input_validation():
    with pytest.raises(ValueError):
        doerfler_mark(np.array([1.0, -1.0]), 0.5)
    with pytest.raises(ValueError):
        doerfler_mark(np.ones(3), 0.0)
    with pytest.raises(ValueError):
        doerfler_mark(np.ones(3), 1.5)


def test_doerfler_minimality_against_brute_force():
    rng = np.random.default_rng(123)
    for trial in range(50):
        n = int(rng.integers(1, 13))
        values = rng.uniform(0.0, 1.0, size=n)
        theta = rng.choice([0.3, 0.5, 0.7, 0.9])
        greedy = doerfler_mark(values, theta)
        assert values[greedy].sum() >= theta * values.sum() - 1e-12
        assert greedy.size == brute_force_min_cardinality(values, theta)


def test_config_validation():
    with pytest.raises(ValueError):
        AdaptiveConfig(theta=0.0)
    with pytest.raises(ValueError):
        AdaptiveConfig(theta=1.0)
    with pytest.raises(ValueError):
        AdaptiveConfig(theta=0.5, marking_source="maximum")
    with pytest.raises(ValueError):
        AdaptiveConfig(theta=0.5, max_iterations=None, target_total_estimator=None, max_intervals=None)


def test_run_zero_problem_stops_immediately():
    d = 1
    problem = OdeProblem(
        name="zero", dim=d, t0=0.0, t_end=1.0, y0=np.ones(d),
        f=lambda t, y: np.zeros(d), jac_y=lambda t, y: np.zeros((d, d)),
        f_t=lambda t, y: np.zeros(d), residual_weight=NormWeight(), is_linear=True,
    )
    config = AdaptiveConfig(theta=0.5, target_total_estimator=1e-10, max_iterations=50)
    result = run(problem, make_initial(0.0, 1.0, 4), build_rule(LOBATTO, 2), config)
    assert len(result.record.rows) == 1
    assert result.record.rows[0].eta_total == 0.0
    assert result.record.rows[0].n_intervals == 4


def test_run_theta_near_one_behaves_like_uniform_refinement():
    problem = linear_test(-1.0)
    config = AdaptiveConfig(theta=0.999999999, max_iterations=4)
    result = run(problem, make_initial(0.0, 1.0, 4), build_rule(LOBATTO, 2), config)
    counts = [r.n_intervals for r in result.record.rows]
    assert counts == [4, 8, 16, 32]


def test_run_record_invariants_and_mesh_chain():
    problem = van_der_pol(10.0)
    config = AdaptiveConfig(theta=0.7, max_iterations=6)
    meshes = []
    result = run(problem, make_initial(0.0, 20.0, 16), build_rule(LOBATTO, 2), config,
                 on_iterate=lambda info: meshes.append(info.mesh))
    counts = np.array([r.n_intervals for r in result.record.rows])
    assert np.all(np.diff(counts) > 0)
    cumulative = np.array([r.cumulative_seconds for r in result.record.rows])
    assert np.all(np.diff(cumulative) >= 0)
    solve_sum = sum(r.solve_seconds for r in result.record.rows)
    assert abs(cumulative[-1] - solve_sum) < 1e-9
    for coarse, fine in zip(meshes[:-1], meshes[1:]):
        assert is_refinement_of(fine, coarse)
    assert all(r.marked > 0 for r in result.record.rows[:-1])


def test_run_reports_raw_estimator_for_all_marking_sources():
    problem = van_der_pol(5.0, t_end=10.0)
    rule = build_rule(LOBATTO, 2)
    for source in ("raw", "confidence", "linf", "linf-confidence"):
        config = AdaptiveConfig(theta=0.6, marking_source=source, max_iterations=3)
        checks = []

        def cb(info):
            raw = estimate(problem, solve(problem, info.mesh, rule)[0])
            checks.append(abs(info.estimates.total - raw.total))

        result = run(problem, make_initial(0.0, 10.0, 16), rule, config, on_iterate=cb)
        assert max(checks) < 1e-12
        assert all(r.eta_total > 0 for r in result.record.rows)


def test_run_max_intervals_guard():
    problem = linear_test(-1.0)
    config = AdaptiveConfig(theta=0.9, max_iterations=50, max_intervals=20)
    result = run(problem, make_initial(0.0, 1.0, 4), build_rule(LOBATTO, 2), config)
    assert result.record.rows[-1].n_intervals <= 20


def test_run_target_estimator_stop():
    problem = linear_test(-1.0)
    config = AdaptiveConfig(theta=0.5, max_iterations=100, target_total_estimator=1e-3)
    result = run(problem, make_initial(0.0, 1.0, 4), build_rule(LOBATTO, 2), config)
    assert result.record.rows[-1].eta_total <= 1e-3
    assert all(r.eta_total > 1e-3 for r in result.record.rows[:-1])


def test_newton_failure_refinement_flagged_and_marked():
    problem = make_problem("vdp-eps", eps=1e-4, t_end=1.0)
    config = AdaptiveConfig(
        theta=0.5,
        max_iterations=3,
        refine_on_newton_failure=True,
        newton=NewtonConfig(max_iter=8),
    )
    infos = []
    run(problem, make_initial(0.0, 1.0, 4), build_rule(RADAU_RIGHT, 2), config,
        on_iterate=lambda info: infos.append(info))
    first = infos[0]
    assert first.report.n_failures > 0
    failed = np.flatnonzero(~first.report.converged)
    assert np.all(np.isin(failed, first.marked))


def test_predator_prey_reaches_target_without_newton_failures():
    problem = make_problem("predator-prey")
    config = AdaptiveConfig(theta=0.7, target_total_estimator=0.5, max_iterations=40, max_intervals=100_000)
    result = run(problem, make_initial(0.0, 20.0, 32), build_rule(LOBATTO, 2), config)
    assert result.record.rows[-1].eta_total <= 0.5
    assert all(r.newton_failures == 0 for r in result.record.rows)


def test_vdp_small_steps_concentrate_at_transitions():
    # regression floor: at equal interval count the adaptive mesh must have
    # some interval at least 5x smaller than the uniform step
    problem = van_der_pol(10.0)
    config = AdaptiveConfig(theta=0.7, max_iterations=40, max_intervals=20_000)
    result = run(problem, make_initial(0.0, 20.0, 32), build_rule(LOBATTO, 2), config,
                 on_iterate=lambda info: info.mesh.n_intervals >= 512)
    n = result.spline.mesh.n_intervals
    uniform_step = 20.0 / n
    assert result.spline.mesh.lengths.min() < uniform_step / 5.0


def test_callback_can_stop_the_loop():
    problem = linear_test(-1.0)
    config = AdaptiveConfig(theta=0.5, max_iterations=100)
    result = run(problem, make_initial(0.0, 1.0, 4), build_rule(LOBATTO, 2), config,
                 on_iterate=lambda info: info.mesh.n_intervals >= 10)
    assert result.record.rows[-1].n_intervals >= 10
    assert len(result.record.rows) < 100


def _synthetic_record(counts, etas):
    rows = [IterationRow(i, int(n), float(e), 0, 0, 0.0, 0.0) for i, (n, e) in enumerate(zip(counts, etas))]
    return AdaptiveRecord(rows)


def test_observed_rate_exact_power_law():
    counts = np.array([4, 8, 16, 32, 64, 128])
    record = _synthetic_record(counts, counts.astype(float) ** -2)
    assert abs(observed_rate(record) + 2.0) < 1e-10


def test_observed_rate_constant_is_zero():
    counts = np.array([4, 8, 16, 32])
    record = _synthetic_record(counts, np.full(4, 3.3))
    assert abs(observed_rate(record)) < 1e-12


def test_observed_rate_requires_four_points():
    with pytest.raises(ValueError):
        observed_rate(np.array([4, 8, 16]), np.array([1.0, 0.5, 0.25]))


def test_observed_rate_uniform_study_linear_p1():
    problem = linear_test(-1.0)
    counts, etas = [], []
    for n in (8, 16, 32, 64, 128, 256):
        spline, _ = solve(problem, make_initial(0.0, 1.0, n), build_rule(LOBATTO, 2))
        counts.append(n)
        etas.append(estimate(problem, spline).total)
    assert abs(observed_rate(counts, etas) + 1.0) < 0.1


def test_record_jsonl_keys():
    import json

    record = _synthetic_record([4, 8, 16, 32], [1.0, 0.5, 0.25, 0.125])
    lines = record.to_jsonl().strip().splitlines()
    assert len(lines) == 4
    obj = json.loads(lines[0])
    assert set(obj) == {"iter", "n_intervals", "eta_total", "marked", "newton_failures",
                        "solve_seconds", "cumulative_seconds"}

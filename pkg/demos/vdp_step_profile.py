"""Step-size profile of the adaptive loop on the Van der Pol oscillator.

With mu = 10 the solution has steep relaxation transitions; the adaptive
loop concentrates small intervals there while uniform stepping spends the
same budget everywhere. We print a coarse picture of where the small steps
end up and compare the estimator against uniform stepping.
"""

import numpy as np

from adastep import AdaptiveConfig, build_rule, estimate, make_initial, make_problem, run, solve

problem = make_problem("vdp", mu=10.0)
rule = build_rule("lobatto", 2)

config = AdaptiveConfig(theta=0.7, max_iterations=60, max_intervals=50_000)
result = run(
    problem,
    make_initial(0.0, 20.0, 32),
    rule,
    config,
    on_iterate=lambda info: info.mesh.n_intervals >= 2048,
)
mesh = result.spline.mesh
n = mesh.n_intervals
print(f"adaptive mesh after {len(result.record.rows)} iterations: {n} intervals")
print(f"step sizes: min {mesh.lengths.min():.2e}, max {mesh.lengths.max():.2e}, "
      f"ratio {mesh.lengths.max() / mesh.lengths.min():.0f}")

uniform_spline, _ = solve(problem, make_initial(0.0, 20.0, n), rule)
print(f"eta at matched n: adaptive {result.estimates.total:.4e} vs uniform "
      f"{estimate(problem, uniform_spline).total:.4e}")

# histogram of interval counts per unit time: steep transitions show up as
# clusters of many small intervals
counts, edges = np.histogram(mesh.breakpoints[:-1], bins=20, range=(0.0, 20.0))
peak = counts.max()
print("\nintervals per unit of time (each # is ~{:d} intervals):".format(max(peak // 40, 1)))
for c, lo in zip(counts, edges[:-1]):
    bar = "#" * int(np.ceil(40 * c / peak))
    print(f"  t in [{lo:4.1f}, {lo + 1.0:4.1f}): {c:5d} {bar}")

x_vals = result.spline.value(np.linspace(0, 20, 201))[:, 0]
print(f"\nsolution x(t) range: [{x_vals.min():+.2f}, {x_vals.max():+.2f}] "
      "(relaxation oscillation between about -2 and 2)")

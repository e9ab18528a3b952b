"""Rate-optimal adaptive time stepping for ODE initial-value problems.

The pipeline: a quadrature rule picks the continuous Petrov-Galerkin
time-stepping scheme (solver), an element-wise residual estimator grades the
intervals (estimators), a minimal-cardinality marking plus midpoint bisection
refines the mesh (adaptive, time_mesh), and the bench module reproduces the
adaptive-vs-uniform and classical-controller comparisons.
"""

from .adaptive import (
    AdaptiveConfig,
    AdaptiveRecord,
    AdaptiveResult,
    doerfler_mark,
    observed_rate,
    run,
)
from .bench import (
    ExperimentConfig,
    ResultRow,
    classical_radau_baseline,
    emit,
    parse_scheme,
    run_experiment,
)
from .error_metrics import ReferenceSolution, h1_error, linf_sampled
from .estimators import (
    LocalEstimates,
    confidence_modify,
    estimate,
    linf_bound,
    linf_indicator,
    reliability_constant,
)
from .problems import (
    HeatSemiDiscretization,
    NormWeight,
    OdeProblem,
    PROBLEM_NAMES,
    assemble_heat,
    linear_test,
    make_problem,
    predator_prey,
    van_der_pol,
    van_der_pol_eps,
)
from .quadrature import (
    GAUSS_LEGENDRE,
    LOBATTO,
    RADAU_RIGHT,
    LagrangeBasis,
    QuadRule,
    build_rule,
    integrate,
)
from .solver import (
    NewtonConfig,
    NewtonReport,
    SplineSolution,
    ansatz_degree,
    discrete_residual_means,
    interval_equations,
    residual,
    solve,
)
from .time_mesh import TimeMesh, bisect, is_refinement_of, make_initial

__version__ = "0.1.0"

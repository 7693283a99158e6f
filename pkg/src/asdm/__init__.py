"""Fully adaptive steepest descent for smooth pseudo-convex minimization."""

from .diagnostics import AuditReport, audit_trace, decrease_constant, epsilon_bound, fit_sublinear_constant, theta_estimate
from .directions import DirectionChoice, is_eps_normalized, normalize
from .errors import BacktrackExhausted, ConfigurationError, ObjectiveDomainError, OptimalityReached
from .objectives import (
    CountingObjective,
    ObjectiveMetadata,
    ObjectiveSpec,
    SegmentSample,
    check_gradient,
    condition_a_residual,
    differential_inequality_residual,
    evaluate,
    gradient,
    pseudoconvexity_witness,
)
from .problems import SUITE, Problem, get_problem
from .solver import (
    Baseline,
    IterationRecord,
    SolverParams,
    Status,
    Trace,
    solve,
    solve_baseline,
    stopping,
    update_epsilon,
)
from .step_rules import Rule, StepSearchResult, backtrack, mu_lower_estimate, rule1_holds, rule2_holds, step_lower_bound

__version__ = "0.1.0"

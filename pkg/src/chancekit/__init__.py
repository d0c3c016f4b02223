"""Chance-constrained linear programs: reformulations, certificates and a small solver stack."""

from .certificates import (CertificateError, FeasibilityBound, LowerBoundPlan, NoFeasibleBudget, NoValidL,
                           PosteriorCertificate, PriorCertificate, binomial_tail, discard_budget,
                           posterior_violation_bound, prior_sample_size_exact, prior_sample_size_simple,
                           wait_and_judge_epsilon, wait_and_judge_root)
from .lpformat import read_lp, to_lp_string, write_lp
from .model import (CCProgram, CCRow, GaussianCC, GeneratorSpec, LinearRow, ScenarioSet, draw_scenarios,
                    evaluate_inner, make_rng, violation_indicator)
from .program import DeterministicProgram, ProgramBuilder, SOCRow
from .reformulate import (bonferroni_split, cvar_sample, gaussian_socp, saa_bigM, saa_separable_strong,
                          scenario_problem)
from .robust import (DirectionalDeviations, UncertaintySetSpec, directional_deviations, pi_bound_program,
                     pi_cvar_bound, pi_value, robust_counterpart)
from .solvers import SolveResult, solve, solve_lp, solve_milp, solve_soc
from .support import find_support_scenarios, solve_scenario
from .validate import estimate_violation

__all__ = [
    "CCProgram",
    "CCRow",
    "CertificateError",
    "DeterministicProgram",
    "DirectionalDeviations",
    "FeasibilityBound",
    "GaussianCC",
    "GeneratorSpec",
    "LinearRow",
    "LowerBoundPlan",
    "NoFeasibleBudget",
    "NoValidL",
    "PosteriorCertificate",
    "PriorCertificate",
    "ProgramBuilder",
    "SOCRow",
    "ScenarioSet",
    "SolveResult",
    "UncertaintySetSpec",
    "binomial_tail",
    "bonferroni_split",
    "cvar_sample",
    "directional_deviations",
    "discard_budget",
    "draw_scenarios",
    "estimate_violation",
    "evaluate_inner",
    "find_support_scenarios",
    "gaussian_socp",
    "make_rng",
    "pi_bound_program",
    "pi_cvar_bound",
    "pi_value",
    "posterior_violation_bound",
    "prior_sample_size_exact",
    "prior_sample_size_simple",
    "read_lp",
    "robust_counterpart",
    "saa_bigM",
    "saa_separable_strong",
    "scenario_problem",
    "solve",
    "solve_lp",
    "solve_milp",
    "solve_scenario",
    "solve_soc",
    "to_lp_string",
    "violation_indicator",
    "wait_and_judge_epsilon",
    "wait_and_judge_root",
    "write_lp",
]

__version__ = "0.1.0"

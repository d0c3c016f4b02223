"""Support-scenario identification and degeneracy detection for scenario programs."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .model import CCProgram, ScenarioSet
from .program import DeterministicProgram, dense_terms
from .reformulate import decision_builder
from .solvers import OPTIMAL, UNBOUNDED, SolveResult, solve_lp

SUPPORT_TOL = 1e-7


class SupportReport(NamedTuple):
    support: list[int]
    count: int
    degenerate: bool
    objective_all: float
    objective_support: float


def scenario_lp(prog: CCProgram, data: np.ndarray) -> DeterministicProgram:
    """Scenario program over an arbitrary (possibly empty) scenario matrix."""
    bld = decision_builder(prog)
    for j, xi in enumerate(data):
        for i, row in enumerate(prog.cc_rows):
            coef, const = row.scenario_coef(xi)
            bld.add_row(dense_terms(coef), "<=", -const, f"s{j + 1}_r{i + 1}")
    return bld.build(prog.n, "scenario", {"N": len(data)})


def solve_scenario(prog: CCProgram, scen: ScenarioSet, support: bool = False) -> SolveResult:
    """Lexicographically tie-broken scenario solve, optionally with support detection."""
    res = solve_lp(scenario_lp(prog, scen.data), lexicographic=True)
    if support and res.optimal:
        rep = find_support_scenarios(prog, scen, res)
        res.support_set = rep.support
        res.degenerate = rep.degenerate
    return res


def find_support_scenarios(prog: CCProgram, scen: ScenarioSet, base: SolveResult | None = None) -> SupportReport:
    """Scenarios whose removal changes the optimizer.

    Optimizers are compared after a lexicographic tie-break (smallest decision
    vector among optimal points), so the comparison is well defined even when
    the optimum is not unique.  Scenario ``j`` is a support scenario when the
    optimizer moves by more than ``1e-7`` in the infinity norm, or when the
    problem becomes unbounded without it.  The problem is flagged degenerate
    when keeping only the support scenarios changes the optimal value.

    Parameters
    ----------
    base : SolveResult, optional
        Result of the full scenario program; must be optimal.  The reference
        optimizer is recomputed with the tie-break either way.
    """
    if base is not None and not base.optimal:
        raise ValueError("support detection needs an optimal base solution")
    data = scen.data
    ref = solve_lp(scenario_lp(prog, data), lexicographic=True)
    if not ref.optimal:
        raise ValueError(f"scenario program is {ref.status}")
    support = []
    for j in range(scen.N):
        reduced = np.delete(data, j, axis=0)
        res = solve_lp(scenario_lp(prog, reduced), lexicographic=True)
        if res.status == UNBOUNDED:
            support.append(j)
        elif res.status == OPTIMAL and np.max(np.abs(res.x_star - ref.x_star)) > SUPPORT_TOL:
            support.append(j)
    only = solve_lp(scenario_lp(prog, data[support]), lexicographic=False)
    if only.optimal:
        obj_s = only.objective
        degenerate = abs(obj_s - ref.objective) > SUPPORT_TOL
    else:
        obj_s = -np.inf if only.status == UNBOUNDED else np.nan
        degenerate = True
    return SupportReport(support, len(support), bool(degenerate), ref.objective, float(obj_s))

"""Sample-based and Gaussian reformulations of a chance-constrained program.

Each builder returns an immutable :class:`DeterministicProgram` whose first
``n`` variables are the decision vector.  Robust and moment-bound safe
approximations live in :mod:`chancekit.robust`.
"""

from __future__ import annotations

from statistics import NormalDist

import numpy as np

from .model import CCProgram, GaussianCC, GeneratorSpec, ScenarioSet, floor_count
from .program import BINARY, DeterministicProgram, ProgramBuilder, dense_terms
from .solvers import solve_lp


def _check_scenarios(prog: CCProgram, scen: ScenarioSet) -> None:
    if scen.d != prog.d:
        raise ValueError(f"scenarios have dimension {scen.d}, program expects {prog.d}")


def decision_builder(prog: CCProgram) -> ProgramBuilder:
    """Builder pre-loaded with x, its bounds, the objective and deterministic rows."""
    bld = ProgramBuilder()
    for j in range(prog.n):
        bld.add_var(f"x{j + 1}", prog.lower[j], prog.upper[j], prog.c[j])
    for i, row in enumerate(prog.det_rows):
        bld.add_row(dense_terms(row.coef), row.sense, row.rhs, f"det{i + 1}")
    return bld


def _scenario_rows(prog: CCProgram, xi):
    """(coef, const) of every inner row at scenario ``xi``: row is ``coef @ x + const <= 0``."""
    return [row.scenario_coef(xi) for row in prog.cc_rows]


def scenario_problem(prog: CCProgram, scen: ScenarioSet) -> DeterministicProgram:
    """Scenario program: every inner row enforced at every sampled scenario."""
    _check_scenarios(prog, scen)
    bld = decision_builder(prog)
    for j, xi in enumerate(scen.data):
        for i, (coef, const) in enumerate(_scenario_rows(prog, xi)):
            bld.add_row(dense_terms(coef), "<=", -const, f"s{j + 1}_r{i + 1}")
    return bld.build(prog.n, "scenario", {"N": scen.N, "m": prog.m})


def interval_max(coef, const, lower, upper) -> float:
    """Maximum of ``coef @ x + const`` over the box ``[lower, upper]``."""
    coef = np.asarray(coef, dtype=float)
    hi = np.where(coef > 0, coef * upper, np.where(coef < 0, coef * lower, 0.0))
    return float(const + hi.sum())


def saa_bigM(prog: CCProgram, scen: ScenarioSet, eps_level: float, bigM: float | None = None) -> DeterministicProgram:
    """Big-M mixed-integer form of sample average approximation.

    Binary ``z_j`` switches off scenario ``j``; rows ``f_i(x, xi_j) <= M_ij z_j``
    and the cardinality row ``sum z <= floor(eps_level N)``.

    Parameters
    ----------
    bigM : float, optional
        Uniform override.  When omitted each ``M_ij`` is the row's maximum over
        the variable box, found by interval arithmetic, which needs finite
        bounds on every variable the row touches.
    """
    _check_scenarios(prog, scen)
    if not 0.0 <= eps_level < 1.0:
        raise ValueError("eps_level must lie in [0, 1)")
    bld = decision_builder(prog)
    z = bld.add_vars("z", scen.N, 0.0, 1.0, BINARY)
    big = []
    for j, xi in enumerate(scen.data):
        for i, (coef, const) in enumerate(_scenario_rows(prog, xi)):
            if bigM is None:
                M = interval_max(coef, const, prog.lower, prog.upper)
                if not np.isfinite(M):
                    raise ValueError("automatic big-M needs finite variable bounds; pass bigM explicitly")
                M = max(M, 0.0)
            else:
                M = float(bigM)
            big.append(M)
            terms = dense_terms(coef)
            terms[z[j]] = -M
            bld.add_row(terms, "<=", -const, f"s{j + 1}_r{i + 1}")
    budget = floor_count(eps_level, scen.N)
    bld.add_row({k: 1.0 for k in z}, "<=", budget, "cardinality")
    meta = {"N": scen.N, "eps_level": eps_level, "budget": budget, "bigM": big}
    return bld.build(prog.n, "saa_bigM", meta)


def saa_separable_strong(prog: CCProgram, scen: ScenarioSet, eps_level: float) -> DeterministicProgram:
    """Big-M-free form for separable rows ``T x >= r(xi)``.

    Row ``k`` reads ``a0_k @ x + b0_k + b_k @ xi <= 0``, so ``T_k = -a0_k`` and
    ``r_k = b0_k + b_k @ xi``.  With ``v_k = T_k x + s_k`` the rows are
    ``v_k + r'_kj z_j >= r'_kj`` where ``r' = r + s``.  The shift ``s_k`` is
    minus the largest implied lower bound on ``T_k x``: the smallest scenario
    value (some scenario is always kept) or the box bound, whichever is larger.
    """
    _check_scenarios(prog, scen)
    if not prog.separable:
        raise ValueError("the strong form needs separable rows (every A_i == 0)")
    if not 0.0 <= eps_level < 1.0:
        raise ValueError("eps_level must lie in [0, 1)")
    bld = decision_builder(prog)
    z = bld.add_vars("z", scen.N, 0.0, 1.0, BINARY)
    shifts = []
    for k, row in enumerate(prog.cc_rows):
        T = -row.a0
        r = row.b0 + scen.data @ row.b
        box_lo = -interval_max(-T, 0.0, prog.lower, prog.upper)
        s = -max(float(r.min()), box_lo)
        shifts.append(s)
        v = bld.add_var(f"v{k + 1}")
        terms = dense_terms(T)
        terms[v] = -1.0
        bld.add_row(terms, "=", -s, f"link{k + 1}")
        for j in range(scen.N):
            rp = float(r[j] + s)
            bld.add_row({v: 1.0, z[j]: rp}, ">=", rp, f"s{j + 1}_r{k + 1}")
    budget = floor_count(eps_level, scen.N)
    bld.add_row({k: 1.0 for k in z}, "<=", budget, "cardinality")
    meta = {"N": scen.N, "eps_level": eps_level, "budget": budget, "shift": shifts}
    return bld.build(prog.n, "saa_strong", meta)


def cvar_sample(prog: CCProgram, scen: ScenarioSet, eps: float | None = None) -> DeterministicProgram:
    """Hinge LP for the sample CVaR constraint ``(1/N) sum [fbar_i + t]_+ <= t eps``.

    Auxiliaries ``t`` (free) and ``s_i >= 0`` with ``s_i >= f_k(x, xi_i) + t`` for
    every row ``k``; the joint constraint goes through the pointwise max.
    """
    _check_scenarios(prog, scen)
    eps = prog.epsilon if eps is None else float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    bld = decision_builder(prog)
    t = bld.add_var("t")
    s = bld.add_vars("s", scen.N, 0.0)
    for j, xi in enumerate(scen.data):
        for i, (coef, const) in enumerate(_scenario_rows(prog, xi)):
            terms = dense_terms(coef)
            terms[t] = 1.0
            terms[s[j]] = -1.0
            bld.add_row(terms, "<=", -const, f"s{j + 1}_r{i + 1}")
    terms = {k: 1.0 / scen.N for k in s}
    terms[t] = -eps
    bld.add_row(terms, "<=", 0.0, "cvar")
    return bld.build(prog.n, "cvar_sample", {"N": scen.N, "eps": eps})


def empirical_cvar(values, eps: float) -> float:
    """``min_g g + sum [v_i - g]_+ / (eps N)`` solved as an LP over ``(g, s)``."""
    values = np.asarray(values, dtype=float).ravel()
    N = values.size
    bld = ProgramBuilder()
    g = bld.add_var("g", cost=1.0)
    s = [bld.add_var(f"s{i + 1}", 0.0, np.inf, 1.0 / (eps * N)) for i in range(N)]
    for i, v in enumerate(values):
        bld.add_row({g: -1.0, s[i]: -1.0}, "<=", -v, f"h{i + 1}")
    res = solve_lp(bld.build(0, "cvar_eval"))
    return res.objective


def normal_quantile(p: float) -> float:
    """Standard normal quantile (Wichura's AS241 rational approximation, about 1e-16 relative)."""
    return NormalDist().inv_cdf(p)


def gaussian_socp(gcc: GaussianCC, c, lower=None, upper=None, det_rows=()) -> DeterministicProgram:
    """Second-order cone form of a Gaussian individual chance constraint.

    ``||S (b + D x)|| <= (e - b^T mu - (a + D^T mu)^T x) / q`` with ``S`` the
    symmetric square root of Sigma and ``q = Phi^{-1}(1 - eps)``.  At ``eps = 1/2``
    the quantile vanishes and the row becomes the linear mean constraint.
    """
    n = gcc.a.shape[0]
    c = np.asarray(c, dtype=float)
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    prog_like = ProgramBuilder()
    for j in range(n):
        prog_like.add_var(f"x{j + 1}", lower[j], upper[j], c[j])
    for i, row in enumerate(det_rows):
        prog_like.add_row(dense_terms(row.coef), row.sense, row.rhs, f"det{i + 1}")
    w, V = np.linalg.eigh(gcc.Sigma)
    S = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    q = normal_quantile(1.0 - gcc.epsilon)
    mean_coef = gcc.a + gcc.D.T @ gcc.mu
    mean_const = float(gcc.b @ gcc.mu)
    if q <= 0.0:
        prog_like.add_row(dense_terms(mean_coef), "<=", gcc.e - mean_const, "gaussian_mean")
    else:
        F = S @ gcc.D
        prog_like.add_soc([dense_terms(F[k]) for k in range(F.shape[0])], S @ gcc.b,
                          dense_terms(-mean_coef / q), (gcc.e - mean_const) / q)
    return prog_like.build(n, "gaussian_socp", {"quantile": q, "eps": gcc.epsilon})


def gaussian_from_program(prog: CCProgram, gen: GeneratorSpec) -> DeterministicProgram:
    gcc = GaussianCC.from_program(prog, gen)
    return gaussian_socp(gcc, prog.c, prog.lower, prog.upper, prog.det_rows)


def bonferroni_split(prog: CCProgram, weights=None) -> list[CCProgram]:
    """Split a joint constraint into individual ones with ``sum eps_i <= eps``.

    The intersection of the returned constraints is a safe approximation of the
    joint one (union bound), not an equivalent.  Weights default to ``eps / m``;
    choosing them well is left to the caller.
    """
    m = prog.m
    if weights is None:
        weights = np.full(m, prog.epsilon / m)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (m,) or np.any(weights <= 0):
        raise ValueError("need one positive weight per chance-constrained row")
    if weights.sum() > prog.epsilon + 1e-12:
        raise ValueError(f"weights sum to {weights.sum():g}, above epsilon = {prog.epsilon:g}")
    return [prog.with_rows([row], float(w)) for row, w in zip(prog.cc_rows, weights)]

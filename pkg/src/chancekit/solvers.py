"""Desk-scale deterministic solvers: dense two-phase simplex, branch and bound, Kelley cuts.

Everything here works on plain numpy arrays and owns its workspace, so distinct
problems can be solved concurrently.  Tolerance hierarchy: feasibility and
optimality 1e-9, cone-row violation 1e-7.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .program import DeterministicProgram

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
MAX_PIVOTS = 100_000
MAX_NODES = 1_000_000
INT_TOL = 1e-6
SOC_TOL = 1e-7
SOC_MAX_ITER = 500
# consecutive degenerate pivots tolerated before switching to Bland's rule
DEGENERATE_STREAK = 50


class UnboundedRelaxation(RuntimeError):
    """The polyhedral relaxation inside the cutting-plane loop has no finite optimum."""


@dataclass
class SolveResult:
    status: str
    x_star: np.ndarray | None = None
    objective: float = math.nan
    values: np.ndarray | None = None
    support_set: list[int] | None = None
    degenerate: bool | None = None
    pivot_count: int = 0
    node_count: int = 0
    iterations: int = 0
    dual_objective: float = math.nan
    history: list[float] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class _LPOutcome:
    status: str
    v: np.ndarray | None = None
    objective: float = math.nan
    pivots: int = 0
    dual_objective: float = math.nan


# ---------------------------------------------------------------------------
# dense simplex on min c^T v, rows, bounds
# ---------------------------------------------------------------------------

def _pivot(T, r, col):
    T[r] /= T[r, col]
    f = T[:, col].copy()
    f[r] = 0.0
    T -= np.outer(f, T[r])


def _run_simplex(T, basis, ncols, max_pivots, pivots):
    """Minimise the objective held in the last tableau row over columns ``< ncols``.

    Dantzig pricing, falling back to Bland's rule after a streak of degenerate
    pivots so that cycling cannot occur.
    """
    m = T.shape[0] - 1
    bland = False
    streak = 0
    while True:
        d = T[-1, :ncols]
        if bland:
            cand = np.flatnonzero(d < -OPT_TOL)
            if cand.size == 0:
                return OPTIMAL, pivots
            col = int(cand[0])
        else:
            col = int(np.argmin(d))
            if d[col] >= -OPT_TOL:
                return OPTIMAL, pivots
        column = T[:m, col]
        pos = np.flatnonzero(column > PIVOT_TOL)
        if pos.size == 0:
            return UNBOUNDED, pivots
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * (1.0 + abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        if pivots >= max_pivots:
            return ITERATION_LIMIT, pivots
        _pivot(T, r, col)
        basis[r] = col
        pivots += 1
        if best <= 1e-12:
            streak += 1
            if streak > DEGENERATE_STREAK:
                bland = True
        else:
            streak = 0


def _lp(c, A, senses, rhs, lower, upper, max_pivots=MAX_PIVOTS) -> _LPOutcome:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.shape[0])
    rhs = np.asarray(rhs, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    nv = c.shape[0]
    if np.any(lower > upper + FEAS_TOL):
        return _LPOutcome(INFEASIBLE)

    # x = offset + Mmap @ p with p >= 0
    offset = np.zeros(nv)
    cols: list[tuple[int, float]] = []
    ub_rows: list[tuple[int, float]] = []
    for j in range(nv):
        lo, hi = lower[j], upper[j]
        if hi - lo <= FEAS_TOL and np.isfinite(lo):
            offset[j] = 0.5 * (lo + hi) if hi > lo else lo
        elif np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                ub_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    k = len(cols)
    Mmap = np.zeros((nv, k))
    for q, (j, sgn) in enumerate(cols):
        Mmap[j, q] = sgn

    rows = [A @ Mmap] if A.shape[0] else []
    b_parts = [rhs - A @ offset] if A.shape[0] else []
    sense_list = list(senses)
    if ub_rows:
        U = np.zeros((len(ub_rows), k))
        for r, (q, u) in enumerate(ub_rows):
            U[r, q] = 1.0
        rows.append(U)
        b_parts.append(np.array([u for _, u in ub_rows]))
        sense_list += ["<="] * len(ub_rows)
    const = float(c @ offset)
    cp = Mmap.T @ c
    if not rows:
        if np.any(cp < -OPT_TOL):
            return _LPOutcome(UNBOUNDED)
        return _LPOutcome(OPTIMAL, offset.copy(), const, 0, const)
    Ap = np.vstack(rows)
    b = np.concatenate(b_parts)
    m = Ap.shape[0]

    # inequality rows in <= form with a +1 slack; equality rows flipped to rhs >= 0
    sign = np.array([-1.0 if s == ">=" else 1.0 for s in sense_list])
    eq = np.array([s == "=" for s in sense_list])
    sign[eq & (b < 0)] = -1.0
    Ap = Ap * sign[:, None]
    b = b * sign
    ineq_rows = np.flatnonzero(~eq)
    n_slack = ineq_rows.size
    S = np.zeros((m, n_slack))
    S[ineq_rows, np.arange(n_slack)] = 1.0
    Astd = np.hstack([Ap, S])
    nstd = k + n_slack

    basis = [-1] * m
    for q, i in enumerate(ineq_rows):
        basis[i] = k + q
    # phase-1 columns: one auxiliary column shared by the infeasible <= rows,
    # plus an artificial per equality row
    short = [int(i) for i in ineq_rows if b[i] < 0]
    eq_rows = [int(i) for i in np.flatnonzero(eq)]
    n_aux = (1 if short else 0) + len(eq_rows)
    T = np.zeros((m + 1, nstd + n_aux + 1))
    T[:m, :nstd] = Astd
    T[:m, -1] = b
    col = nstd
    if short:
        T[short, col] = -1.0
        aux_col = col
        col += 1
    for i in eq_rows:
        T[i, col] = 1.0
        basis[i] = col
        col += 1
    pivots = 0
    b_scale = 1.0 + float(np.max(np.abs(b), initial=0.0))

    if n_aux:
        if short:
            r0 = min(short, key=lambda i: (b[i], i))
            _pivot(T, r0, aux_col)
            basis[r0] = aux_col
            pivots += 1
        # phase 1: minimise the auxiliary plus the artificials
        T[-1, :] = 0.0
        T[-1, nstd:nstd + n_aux] = 1.0
        for r in range(m):
            if basis[r] >= nstd:
                T[-1] -= T[r]
        status, pivots = _run_simplex(T, basis, nstd + n_aux, max_pivots, pivots)
        if status == ITERATION_LIMIT:
            return _LPOutcome(ITERATION_LIMIT, pivots=pivots)
        if -T[-1, -1] > FEAS_TOL * b_scale:
            return _LPOutcome(INFEASIBLE, pivots=pivots)
        # drive remaining artificials out of the basis, dropping redundant rows
        drop = []
        for r in range(m):
            if basis[r] >= nstd:
                nz = np.flatnonzero(np.abs(T[r, :nstd]) > 1e-9)
                if nz.size:
                    _pivot(T, r, int(nz[0]))
                    basis[r] = int(nz[0])
                    pivots += 1
                else:
                    drop.append(r)
        if drop:
            keep = [r for r in range(m) if r not in drop]
            T = np.vstack([T[keep], T[-1:]])
            basis = [basis[r] for r in keep]
            Astd = Astd[keep]
            b = b[keep]
            m = len(keep)
        T = np.hstack([T[:, :nstd], T[:, -1:]])

    cstd = np.concatenate([cp, np.zeros(n_slack)])
    T[-1, :] = 0.0
    T[-1, :nstd] = cstd
    for r in range(m):
        if cstd[basis[r]] != 0.0:
            T[-1] -= cstd[basis[r]] * T[r]
    status, pivots = _run_simplex(T, basis, nstd, max_pivots, pivots)
    if status != OPTIMAL:
        return _LPOutcome(status, pivots=pivots)

    p = np.zeros(nstd)
    xb = T[:m, -1].copy()
    dual_obj = math.nan
    if m:
        B = Astd[:, basis]
        try:
            refined = np.linalg.solve(B, b)
            if np.max(np.abs(refined - xb)) <= 1e-7 * b_scale:
                xb = refined
            y = np.linalg.solve(B.T, cstd[basis])
            dual_obj = float(y @ b) + const
        except np.linalg.LinAlgError:
            pass
    p[basis] = np.maximum(xb, 0.0)
    v = offset + Mmap @ p[:k]
    return _LPOutcome(OPTIMAL, v, float(c @ v), pivots, dual_obj)


def _lp_of(dp: DeterministicProgram, lower=None, upper=None, extra_A=None, extra_b=None) -> _LPOutcome:
    A, senses, rhs = dp.A, list(dp.senses), dp.rhs
    if extra_A is not None and len(extra_A):
        A = np.vstack([A, np.asarray(extra_A)])
        senses = senses + ["<="] * len(extra_A)
        rhs = np.concatenate([rhs, np.asarray(extra_b)])
    lo = dp.lower if lower is None else lower
    hi = dp.upper if upper is None else upper
    return _lp(dp.c, A, senses, rhs, lo, hi)


def _result(dp, out: _LPOutcome, **kw) -> SolveResult:
    if out.status != OPTIMAL:
        return SolveResult(out.status, pivot_count=out.pivots, **kw)
    return SolveResult(OPTIMAL, x_star=out.v[:dp.n_decision].copy(), objective=dp.objective(out.v),
                       values=out.v, pivot_count=out.pivots, dual_objective=out.dual_objective + dp.c0, **kw)


def _lexicographic(dp, out, lower=None, upper=None, extra_A=None, extra_b=None) -> _LPOutcome:
    """Among optimal points pick the lexicographically smallest decision vector."""
    nv = dp.num_vars
    A_rows = [] if extra_A is None else [np.asarray(r) for r in extra_A]
    b_rows = [] if extra_b is None else list(extra_b)
    A_rows.append(dp.c.copy())
    b_rows.append(out.objective + 1e-9 * (1.0 + abs(out.objective)))
    best = out
    pivots = out.pivots
    for j in range(dp.n_decision):
        e = np.zeros(nv)
        e[j] = 1.0
        A = np.vstack([dp.A] + [np.atleast_2d(r) for r in A_rows])
        sub = _lp(e, A, list(dp.senses) + ["<="] * len(A_rows), np.concatenate([dp.rhs, b_rows]),
                  dp.lower if lower is None else lower, dp.upper if upper is None else upper)
        pivots += sub.pivots
        if sub.status != OPTIMAL:
            break
        best = sub
        A_rows.append(e)
        b_rows.append(sub.v[j] + 1e-9 * (1.0 + abs(sub.v[j])))
    return _LPOutcome(OPTIMAL, best.v, float(dp.c @ best.v), pivots, out.dual_objective)


def solve_lp(dp: DeterministicProgram, lexicographic: bool = False) -> SolveResult:
    """Solve a pure LP with the dense two-phase simplex.

    Parameters
    ----------
    dp : DeterministicProgram
        Must carry neither binaries nor cone rows.
    lexicographic : bool
        Break ties among optimal points by the lexicographically smallest
        decision vector, which makes optimizer comparisons well defined.
    """
    if dp.has_binaries or dp.soc_rows:
        raise ValueError("solve_lp accepts only continuous programs without cone rows")
    out = _lp_of(dp)
    if out.status == OPTIMAL and lexicographic:
        out = _lexicographic(dp, out)
    return _result(dp, out)


def lp_relaxation(dp: DeterministicProgram) -> SolveResult:
    """Continuous relaxation of a MILP (binaries relaxed to [0, 1])."""
    if dp.soc_rows:
        raise ValueError("cone rows are not supported in MILP relaxations")
    lo, hi = _binary_box(dp)
    return _result(dp, _lp_of(dp, lo, hi))


def _binary_box(dp):
    lo, hi = dp.lower.copy(), dp.upper.copy()
    for j in dp.binary_indices():
        lo[j] = math.ceil(max(lo[j], 0.0) - INT_TOL)
        hi[j] = math.floor(min(hi[j], 1.0) + INT_TOL)
    return lo, hi


def solve_milp(dp: DeterministicProgram, node_limit: int = MAX_NODES) -> SolveResult:
    """Best-first branch and bound over LP relaxations.

    Nodes are ordered by (bound, creation index), so the search is
    deterministic; branching picks the most fractional binary.
    """
    if dp.soc_rows:
        raise ValueError("cone rows are not supported together with binaries")
    bins = dp.binary_indices()
    lo, hi = _binary_box(dp)
    root = _lp_of(dp, lo, hi)
    pivots = root.pivots
    if root.status != OPTIMAL:
        return SolveResult(root.status, pivot_count=pivots, node_count=1)
    counter = itertools.count()
    heap = [(root.objective, next(counter), lo, hi, root.v)]
    incumbent: _LPOutcome | None = None
    nodes = 0
    while heap:
        bound, _, nlo, nhi, v = heapq.heappop(heap)
        if incumbent is not None and bound >= incumbent.objective - 1e-9 * (1.0 + abs(incumbent.objective)):
            break
        if nodes >= node_limit:
            res = _result(dp, incumbent) if incumbent else SolveResult(ITERATION_LIMIT)
            res.status = ITERATION_LIMIT
            res.node_count, res.pivot_count = nodes, pivots
            return res
        nodes += 1
        frac = np.abs(v[bins] - np.round(v[bins])) if bins.size else np.zeros(0)
        if frac.size == 0 or frac.max() <= INT_TOL:
            # clean up the continuous part with binaries fixed at their rounded values
            flo, fhi = nlo.copy(), nhi.copy()
            flo[bins] = fhi[bins] = np.round(v[bins])
            fixed = _lp_of(dp, flo, fhi)
            pivots += fixed.pivots
            if fixed.status == OPTIMAL and (incumbent is None or fixed.objective < incumbent.objective):
                incumbent = fixed
            continue
        j = int(bins[int(np.argmax(frac))])
        for side in (0.0, 1.0):
            clo, chi = nlo.copy(), nhi.copy()
            clo[j] = chi[j] = side
            child = _lp_of(dp, clo, chi)
            pivots += child.pivots
            if child.status == OPTIMAL:
                if incumbent is None or child.objective < incumbent.objective - 1e-9 * (1.0 + abs(incumbent.objective)):
                    heapq.heappush(heap, (child.objective, next(counter), clo, chi, child.v))
            elif child.status == UNBOUNDED:
                return SolveResult(UNBOUNDED, pivot_count=pivots, node_count=nodes)
    if incumbent is None:
        return SolveResult(INFEASIBLE, pivot_count=pivots, node_count=nodes)
    res = _result(dp, incumbent)
    res.pivot_count, res.node_count = pivots, nodes
    return res


def _cut(row, v):
    """Supporting hyperplane of ``||F v + g|| <= h^T v + s`` at ``v`` as (coef, rhs) for ``coef @ v <= rhs``."""
    w = row.F @ v + row.g
    nw = np.linalg.norm(w)
    if nw <= 1e-15:
        return -row.h, row.s
    u = w / nw
    return row.F.T @ u - row.h, row.s - u @ row.g


def solve_soc(dp: DeterministicProgram, tol: float = SOC_TOL, max_iter: int = SOC_MAX_ITER) -> SolveResult:
    """Kelley cutting planes for programs with second-order cone rows.

    Each round solves the polyhedral relaxation and adds the gradient cut of
    every violated cone row.  The objective history is nondecreasing since cuts
    only shrink the relaxation.

    Raises
    ------
    UnboundedRelaxation
        When a relaxation is unbounded; add finite variable bounds.
    """
    if dp.has_binaries:
        raise ValueError("solve_soc does not handle binaries")
    cuts_A, cuts_b = [], []
    zero = np.zeros(dp.num_vars)
    for row in dp.soc_rows:
        if not np.any(row.F):
            # constant norm: the row is exactly h^T v + s >= ||g||
            cuts_A.append(-row.h)
            cuts_b.append(row.s - float(np.linalg.norm(row.g)))
        elif np.linalg.norm(row.g) > 0:
            a, r = _cut(row, zero)
            cuts_A.append(a)
            cuts_b.append(r)
    history: list[float] = []
    pivots = 0
    for it in range(1, max_iter + 1):
        out = _lp_of(dp, extra_A=cuts_A, extra_b=cuts_b)
        pivots += out.pivots
        if out.status == UNBOUNDED:
            raise UnboundedRelaxation("cutting-plane relaxation is unbounded; add finite variable bounds")
        if out.status != OPTIMAL:
            return SolveResult(out.status, pivot_count=pivots, iterations=it, history=history)
        history.append(out.objective)
        worst = 0.0
        for row in dp.soc_rows:
            viol = row.violation(out.v)
            worst = max(worst, viol)
            if viol > tol:
                a, r = _cut(row, out.v)
                cuts_A.append(a)
                cuts_b.append(r)
        if worst <= tol:
            res = _result(dp, out, iterations=it, history=history)
            res.pivot_count = pivots
            return res
    res = _result(dp, out, iterations=max_iter, history=history)
    res.status = ITERATION_LIMIT
    return res


def solve(dp: DeterministicProgram, lexicographic: bool = False) -> SolveResult:
    """Dispatch to the LP, MILP or cone solver according to the program's content."""
    if dp.has_binaries:
        return solve_milp(dp)
    if dp.soc_rows:
        return solve_soc(dp)
    return solve_lp(dp, lexicographic=lexicographic)

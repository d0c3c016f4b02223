"""Monte Carlo certification, scenario-theory experiments and brute-force oracles."""

from __future__ import annotations

import csv
import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import certificates as cert
from .model import CCProgram, GeneratorSpec, ScenarioSet, coordinatewise_program, make_rng
from .reformulate import saa_bigM, saa_separable_strong
from .solvers import solve, solve_lp, solve_milp
from .support import find_support_scenarios, scenario_lp

CSV_FIELDS = ("trial", "N", "objective", "violation", "support_count", "method", "wall_time_ms")


@dataclass(frozen=True)
class ValidationConfig:
    """Knobs for meta-experiments; defaults are pragmatic choices, not derived."""

    meta_repetitions: int = 200
    ci_sigmas: float = 3.0
    chunk: int = 100_000


DEFAULT_CONFIG = ValidationConfig()


def thread_cap() -> int:
    """Worker count from ``CHANCEKIT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CHANCEKIT_THREADS", "1")))
    except ValueError:
        return 1


def binomial_ci(p: float, trials: int, sigmas: float = DEFAULT_CONFIG.ci_sigmas) -> float:
    return sigmas * float(np.sqrt(max(p * (1.0 - p), 0.0) / trials))


def estimate_violation(prog: CCProgram, x, gen: GeneratorSpec, N_hat: int, seed: int,
                       chunk: int = DEFAULT_CONFIG.chunk) -> tuple[float, int]:
    """Fraction of fresh samples with ``max_i f_i(x, xi) > 0``.

    Returns
    -------
    (eps_hat, V_hat)
    """
    if N_hat < 1:
        raise ValueError("N_hat must be at least 1")
    rng = make_rng(seed)
    x = np.asarray(x, dtype=float)
    V = 0
    left = N_hat
    while left:
        k = min(left, chunk)
        vals = prog.inner_values(x, gen.sample(rng, k))
        V += int(np.count_nonzero(vals.max(axis=1) > 0.0))
        left -= k
    return V / N_hat, V


@dataclass(frozen=True)
class CoordinatewiseMaxFamily:
    """``min sum(x)`` s.t. ``P(x >= xi) >= 1 - eps`` with ``xi`` uniform on ``[0, 1]^n``.

    The violation probability is exact, ``1 - prod(clip(x, 0, 1))``, and the
    true optimum is ``n (1 - eps)^(1/n)``.
    """

    n: int
    eps: float = 0.05
    upper: float = 2.0

    @property
    def program(self) -> CCProgram:
        return coordinatewise_program(self.n, self.eps, self.upper)

    @property
    def generator(self) -> GeneratorSpec:
        return GeneratorSpec.uniform_box(np.zeros(self.n), np.ones(self.n))

    def violation(self, x) -> float:
        return float(1.0 - np.prod(np.clip(np.asarray(x, dtype=float), 0.0, 1.0)))

    @property
    def optimum(self) -> float:
        return self.n * (1.0 - self.eps) ** (1.0 / self.n)


@dataclass
class TrialRecord:
    trial: int
    N: int
    objective: float
    violation: float
    support_count: int | None
    method: str
    wall_time_ms: float


@dataclass
class ViolationExperiment:
    records: list[TrialRecord] = field(default_factory=list)

    @property
    def violations(self) -> np.ndarray:
        return np.array([r.violation for r in self.records])

    def tail(self, eps: float) -> float:
        """Empirical ``P(V(x*_N) > eps)``."""
        return float(np.mean(self.violations > eps))

    def write_csv(self, path) -> None:
        write_trials_csv(self.records, path)


def write_trials_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in records:
            w.writerow([r.trial, r.N, repr(float(r.objective)), repr(float(r.violation)),
                        "" if r.support_count is None else r.support_count, r.method, f"{r.wall_time_ms:.3f}"])


def _map_trials(fn, trials: int):
    workers = min(thread_cap(), trials)
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def _require_family(family):
    if not callable(getattr(family, "violation", None)):
        raise ValueError("the family must provide an exact violation(x); use estimate_violation otherwise")


def violation_distribution_experiment(family, N: int, trials: int, seed: int,
                                      support: bool = False) -> ViolationExperiment:
    """Solve the scenario program on fresh data per trial and record the exact violation.

    Trial ``t`` draws from the stream ``(seed, t)``, so results do not depend
    on scheduling and are reduced in trial order.
    """
    _require_family(family)
    prog, gen = family.program, family.generator

    def run(t):
        start = time.perf_counter()
        scen = ScenarioSet(gen.sample(make_rng(seed, t), N), {"seed": seed, "trial": t})
        res = solve_lp(scenario_lp(prog, scen.data), lexicographic=support)
        if not res.optimal:
            raise RuntimeError(f"trial {t}: scenario program {res.status}")
        count = find_support_scenarios(prog, scen, res).count if support else None
        ms = 1e3 * (time.perf_counter() - start)
        return TrialRecord(t, N, res.objective, family.violation(res.x_star), count, "scenario", ms)

    return ViolationExperiment(_map_trials(run, trials))


def discard_solve(prog: CCProgram, scen: ScenarioSet, k: int):
    """Greedy sampling-and-discarding: remove ``k`` scenarios one at a time.

    Each step drops the active scenario whose removal lowers the objective the
    most (ties to the smallest index).  Returns the final result and the
    removed indices.
    """
    keep = list(range(scen.N))
    removed = []
    res = solve_lp(scenario_lp(prog, scen.data), lexicographic=True)
    for _ in range(k):
        vals = prog.inner_values(res.x_star, scen.data[keep]).max(axis=1)
        active = [keep[i] for i in np.flatnonzero(vals >= -1e-9)]
        best = None
        for j in active:
            trial_keep = [i for i in keep if i != j]
            cand = solve_lp(scenario_lp(prog, scen.data[trial_keep]), lexicographic=True)
            if cand.optimal and (best is None or cand.objective < best[1].objective - 1e-12):
                best = (j, cand)
        if best is None:
            break
        keep.remove(best[0])
        removed.append(best[0])
        res = best[1]
    return res, removed


def discarding_experiment(family, N: int, k: int, trials: int, seed: int) -> ViolationExperiment:
    _require_family(family)
    prog, gen = family.program, family.generator

    def run(t):
        start = time.perf_counter()
        scen = ScenarioSet(gen.sample(make_rng(seed, t), N), {"seed": seed, "trial": t})
        res, _ = discard_solve(prog, scen, k)
        ms = 1e3 * (time.perf_counter() - start)
        return TrialRecord(t, N, res.objective, family.violation(res.x_star), None, f"discard{k}", ms)

    return ViolationExperiment(_map_trials(run, trials))


def lower_bound_experiment(prog: CCProgram, gen: GeneratorSpec, M: int, N: int, L: int, delta: float,
                           seed: int) -> tuple[float, np.ndarray]:
    """Order-statistics lower bound from ``M`` independent scenario programs.

    Returns the ``L``-th smallest objective and the sorted objectives.
    """
    if not 1 <= L <= M or cert.order_stat_sum(M, N, prog.epsilon, L) > delta:
        raise ValueError(f"L = {L} does not satisfy the order-statistics condition for (M={M}, N={N})")
    objs = []
    for j in range(M):
        data = gen.sample(make_rng(seed, j), N)
        res = solve_lp(scenario_lp(prog, data))
        if not res.optimal:
            raise RuntimeError(f"replication {j}: scenario program {res.status}")
        objs.append(res.objective)
    objs = np.sort(objs)
    return float(objs[L - 1]), objs


def saa_lower_bound_experiment(prog: CCProgram, gen: GeneratorSpec, K: int, N: int, eps_level: float, L: int,
                               delta: float, seed: int, at_most: bool = True) -> tuple[float, np.ndarray]:
    """Order-statistics lower bound from ``K`` SAA programs at level ``eps_level``.

    ``L`` is checked against the binomial condition; ``at_most=True`` uses
    ``sum <= delta``, the direction that yields the coverage guarantee.
    """
    s = cert.saa_order_stat_sum(K, N, prog.epsilon, eps_level, L) if 1 <= L <= K else np.nan
    ok = (s <= delta) if at_most else (s >= delta)
    if not ok:
        raise ValueError(f"L = {L} does not satisfy the SAA order-statistics condition for (K={K}, N={N})")
    objs = []
    for j in range(K):
        scen = ScenarioSet(gen.sample(make_rng(seed, j), N), {"seed": seed, "replication": j})
        dp = saa_separable_strong(prog, scen, eps_level) if prog.separable else saa_bigM(prog, scen, eps_level)
        res = solve_milp(dp)
        if not res.optimal:
            raise RuntimeError(f"replication {j}: SAA program {res.status}")
        objs.append(res.objective)
    objs = np.sort(objs)
    return float(objs[L - 1]), objs


def solve_and_validate(prog: CCProgram, dp, gen: GeneratorSpec, N_hat: int, seed: int):
    """Solve a reformulation and estimate the violation of its solution on fresh samples."""
    res = solve(dp)
    if not res.optimal:
        return res, None, None
    eps_hat, V = estimate_violation(prog, res.x_star, gen, N_hat, seed)
    return res, eps_hat, V


# ---------------------------------------------------------------------------
# p-efficient points
# ---------------------------------------------------------------------------

def _discrete_cdf(points: np.ndarray, probs: np.ndarray, v) -> float:
    return float(probs[np.all(points <= np.asarray(v, dtype=float), axis=1)].sum())


def p_efficient_points(gen: GeneratorSpec, p: float) -> np.ndarray:
    """Minimal ``v`` with ``P(zeta <= v) >= p`` for a finite discrete ``zeta``.

    Candidates are the grid of coordinatewise support values; minimal
    elements are kept under the componentwise order.  Rows are sorted.
    """
    if gen.kind != "finite_discrete":
        raise ValueError("p-efficient enumeration needs a finite discrete distribution")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    pts = np.atleast_2d(gen.params["points"])
    probs = gen.params["probs"]
    axes = [np.unique(pts[:, j]) for j in range(pts.shape[1])]
    feasible = [np.array(v) for v in itertools.product(*axes) if _discrete_cdf(pts, probs, v) >= p - 1e-12]
    minimal = [v for v in feasible
               if not any(np.all(u <= v) and np.any(u < v) for u in feasible)]
    return np.array(sorted(map(tuple, minimal)))


def cone_union_feasibility_oracle(points, x, f_det) -> bool:
    """True iff ``f_det(x)`` lies in some cone ``v + R_+^m`` anchored at a p-efficient point."""
    fx = np.asarray(f_det(x), dtype=float)
    return bool(any(np.all(fx >= v) for v in np.atleast_2d(points)))


def direct_cdf_feasible(gen: GeneratorSpec, value, p: float) -> bool:
    """``P(zeta <= value) >= p`` evaluated on the finite distribution."""
    pts = np.atleast_2d(gen.params["points"])
    return _discrete_cdf(pts, gen.params["probs"], value) >= p - 1e-12

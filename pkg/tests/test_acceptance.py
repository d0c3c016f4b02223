"""Acceptance suite: the twelve primary criteria at their stated tolerances.

Each criterion prints one ``[PASS]``/``[FAIL]`` line.  Run with
``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.special import erfinv

from instances import bilinear_instance, saa_subset_oracle, separable_instance

from chancekit import certificates as cert
from chancekit.model import CCProgram, CCRow, GaussianCC, GeneratorSpec
from chancekit.reformulate import cvar_sample, empirical_cvar, gaussian_socp, saa_bigM, saa_separable_strong
from chancekit.robust import (UncertaintySetSpec, ball_radius, box_polytope, directional_deviations,
                              pi_cvar_bound, robust_counterpart, uncertainty_set_from_pi)
from chancekit.solvers import lp_relaxation, solve, solve_milp
from chancekit.validate import (CoordinatewiseMaxFamily, binomial_ci, cone_union_feasibility_oracle,
                                direct_cdf_feasible, discarding_experiment, estimate_violation,
                                lower_bound_experiment, p_efficient_points, saa_lower_bound_experiment,
                                violation_distribution_experiment)

RESULTS = {}


def report(number, ok, detail, capsys=None):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    RESULTS[number] = line
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


# -- 1 -----------------------------------------------------------------------------------

def criterion_1():
    start = time.perf_counter()
    exp = violation_distribution_experiment(CoordinatewiseMaxFamily(1, 0.05), 59, 2000, seed=11)
    elapsed = time.perf_counter() - start
    tail, target = exp.tail(0.05), 0.95 ** 59
    ok = abs(tail - target) <= 0.015 and elapsed < 30
    return ok, f"n=1 tail {tail:.4f} vs {target:.4f} (tol 0.015), {elapsed:.1f}s (< 30s)"


# -- 2 -----------------------------------------------------------------------------------

def criterion_2():
    start = time.perf_counter()
    trials = 2000
    exp = violation_distribution_experiment(CoordinatewiseMaxFamily(2, 0.05), 100, trials, seed=12)
    elapsed = time.perf_counter() - start
    ok, parts = elapsed < 120, []
    for eps in (0.02, 0.05, 0.1):
        p = sum(math.comb(100, i) * eps ** i * (1 - eps) ** (100 - i) for i in range(2))
        emp = exp.tail(eps)
        half = 3 * math.sqrt(p * (1 - p) / trials)
        ok &= abs(emp - p) <= half
        parts.append(f"eps={eps}: {emp:.4f} vs {p:.4f}±{half:.4f}")
    return ok, "; ".join(parts) + f"; {elapsed:.1f}s (< 120s)"


# -- 3 -----------------------------------------------------------------------------------

def _exact_tail(N, k, eps):
    e = Fraction(eps)
    return float(sum(math.comb(N, i) * e ** i * (1 - e) ** (N - i) for i in range(k + 1)))


def criterion_3():
    a = cert.prior_sample_size_exact(0.05, 0.05, 1)
    b = cert.prior_sample_size_simple(0.05, 0.05, 1)
    grid = all(cert.prior_sample_size_exact(e, be, h) <= cert.prior_sample_size_simple(e, be, h)
               for e in (0.01, 0.05, 0.1) for be in (0.01, 0.05, 0.1) for h in range(1, 21))
    worst = max(abs(cert.binomial_tail(N, k, e) - _exact_tail(N, k, e))
                for N in range(21) for k in range(N + 1) for e in np.arange(1, 10) / 10)
    ok = a == 59 and b == 160 and grid and worst <= 1e-12
    return ok, f"N2008={a}, N2009={b}, ordering on grid={grid}, tail error {worst:.1e} (<= 1e-12)"


# -- 4 -----------------------------------------------------------------------------------

def _ratio(N, k, beta, t):
    """``lhs / rhs - 1`` of the defining equation in 60-digit arithmetic."""
    with mpmath.workdps(60):
        t = mpmath.mpf(t)
        lhs = mpmath.mpf(beta) / (N + 1) * mpmath.fsum(mpmath.binomial(i, k) * t ** (i - k) for i in range(k, N + 1))
        rhs = mpmath.binomial(N, k) * t ** (N - k)
        return float(lhs / rhs - 1)


def criterion_4():
    worst, mono, bracketed = 0.0, True, True
    for N in (5, 20, 100, 500):
        for beta in (1e-6, 1e-3, 0.05, 0.1):
            ks = range(0, min(N - 1, 12) + 1)
            roots = [cert.wait_and_judge_root(N, k, beta) for k in ks]
            worst = max(worst, max(abs(_ratio(N, k, beta, t)) for k, t in zip(ks, roots)))
            # the sign change sits within a relative 1e-10 of the returned root
            bracketed &= all(_ratio(N, k, beta, t * (1 - 1e-10)) > 0 > _ratio(N, k, beta, t * (1 + 1e-10))
                             for k, t in zip(ks, roots))
            eps = [1 - t for t in roots]
            mono &= all(x < y for x, y in zip(eps, eps[1:]))
    t1 = cert.wait_and_judge_root(1, 0, 0.1)
    ok = worst < 1e-10 and bracketed and mono and abs(t1 - 0.0526315) <= 1e-6
    return ok, (f"max relative residual {worst:.1e} (< 1e-10), sign change bracketed={bracketed}, "
                f"strictly monotone={mono}, N=1 root {t1:.7f}")


# -- 5 and 6 ---------------------------------------------------------------------------------

def _saa_runs():
    rows = []
    for seed in range(50):
        prog, scen, level, budget = separable_instance(seed)
        big, strong = saa_bigM(prog, scen, level), saa_separable_strong(prog, scen, level)
        rows.append((saa_subset_oracle(prog, scen, budget), solve_milp(big).objective,
                     solve_milp(strong).objective, lp_relaxation(big).objective, lp_relaxation(strong).objective))
    return np.array(rows)


_SAA_CACHE = {}


def saa_runs():
    if "runs" not in _SAA_CACHE:
        start = time.perf_counter()
        _SAA_CACHE["runs"] = _saa_runs()
        _SAA_CACHE["time"] = time.perf_counter() - start
    return _SAA_CACHE["runs"], _SAA_CACHE["time"]


def criterion_5():
    runs, elapsed = saa_runs()
    err = float(np.max(np.abs(runs[:, 1] - runs[:, 0])))
    ok = err <= 1e-7 and elapsed < 60
    return ok, f"50 instances, big-M B&B vs subset enumeration max error {err:.1e} (<= 1e-7), {elapsed:.1f}s (< 60s)"


def criterion_6():
    runs, _ = saa_runs()
    gap = float(np.max(np.abs(runs[:, 2] - runs[:, 1])))
    dominated = int(np.sum(runs[:, 4] >= runs[:, 3] - 1e-9))
    ok = gap <= 1e-7 and dominated == len(runs)
    return ok, f"strong vs big-M optimum gap {gap:.1e}; strong relaxation >= big-M on {dominated}/50"


# -- 7 -----------------------------------------------------------------------------------

def criterion_7():
    N, eps, beta, trials = 100, 0.1, 0.1, 200
    k = cert.discard_budget(N, 2, eps, beta)
    exp = discarding_experiment(CoordinatewiseMaxFamily(2, eps), N, k, trials, seed=13)
    cov = float(np.mean(exp.violations <= eps))
    floor = (1 - beta) - binomial_ci(1 - beta, trials)
    return cov >= floor, f"N={N}, k={k}: coverage {cov:.3f} >= {floor:.3f}"


# -- 8 -----------------------------------------------------------------------------------

def _tail_cvar(values, eps):
    v = np.sort(values)[::-1]
    k = int(math.floor(eps * v.size + 1e-12))
    frac = eps * v.size - k
    return (v[:k].sum() + frac * (v[k] if k < v.size else 0.0)) / (eps * v.size)


def criterion_8():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        vals, eps = rng.normal(size=int(rng.integers(1, 40))), float(rng.uniform(0.02, 0.98))
        worst = max(worst, abs(empirical_cvar(vals, eps) - _tail_cvar(vals, eps)))
    shared, dominated = 0, 0
    for seed in range(30):
        prog, scen = bilinear_instance(seed, N=12)
        cv = solve(cvar_sample(prog, scen))
        if not cv.optimal:
            continue
        shared += 1
        dominated += cv.objective >= solve(saa_bigM(prog, scen, prog.epsilon)).objective - 1e-7
    ok = worst <= 1e-9 and dominated == shared and shared > 0
    return ok, f"CVaR LP vs sorted tail max error {worst:.1e} (<= 1e-9); CVaR >= VaR on {dominated}/{shared}"


# -- 9 -----------------------------------------------------------------------------------

def criterion_9():
    ok, parts = True, []
    for eps in (0.01, 0.05, 0.1):
        gcc = GaussianCC([-1.0], [1.0], [[0.0]], 0.0, [0.0], [[1.0]], eps)
        res = solve(gaussian_socp(gcc, [1.0], [-10.0], [10.0]))
        ref = math.sqrt(2) * float(erfinv(1 - 2 * eps))
        ok &= res.optimal and abs(res.objective - ref) <= 1e-5 and res.iterations < 100
        parts.append(f"eps={eps}: {res.objective:.7f} vs {ref:.7f} in {res.iterations} it")
    return ok, "; ".join(parts)


# -- 10 ----------------------------------------------------------------------------------

def _portfolio(eps):
    d = 4
    row = CCRow(np.zeros(d), -1.0, np.diag([0.2, 0.4, 0.6, 0.8]), np.zeros(d))
    return CCProgram(-np.array([1.0, 1.2, 1.4, 1.6]), [row], eps, lower=np.zeros(d), upper=np.full(d, 5.0))


def criterion_10():
    eps, d = 0.05, 4
    gen = GeneratorSpec.uniform_box(-np.ones(d), np.ones(d))
    prog = _portfolio(eps)
    box = solve(robust_counterpart(prog, UncertaintySetSpec.box()))
    v_box, _ = estimate_violation(prog, box.x_star, gen, 100_000, seed=101)
    ball = solve(robust_counterpart(prog, UncertaintySetSpec.ball(ball_radius(eps))))
    v_ball, _ = estimate_violation(prog, ball.x_star, gen, 100_000, seed=102)
    ball_cap = eps + 3 * math.sqrt(eps * (1 - eps) / 100_000)
    ctx = dict(W=box_polytope(d), Sigma=np.eye(d) / 3, deviations=directional_deviations(gen))
    rng = np.random.default_rng(10)
    worst = 0.0
    for which in (1, 3, 4, 5):
        U = uncertainty_set_from_pi(which, eps, **ctx)
        for _ in range(100):
            x0, y = float(rng.normal()), rng.normal(size=d)
            worst = max(worst, abs(pi_cvar_bound(which, x0, y, eps, **ctx) - (x0 + U.support(y))))
    ok = box.optimal and v_box == 0.0 and ball.optimal and v_ball <= ball_cap and worst <= 1e-6
    return ok, (f"box violation {v_box:.5f} (== 0); ball violation {v_ball:.5f} (<= {ball_cap:.5f}); "
                f"pi vs set max gap {worst:.1e} (<= 1e-6)")


# -- 11 ----------------------------------------------------------------------------------

def criterion_11():
    fam = CoordinatewiseMaxFamily(2, 0.1)
    reps, delta = 200, 0.05
    floor = (1 - delta) - binomial_ci(1 - delta, reps)
    M, N = 10, 10
    L2 = cert.order_stat_index(M, N, fam.eps, delta)
    cov2 = np.mean([lower_bound_experiment(fam.program, fam.generator, M, N, L2, delta, seed=1000 + r)[0]
                    <= fam.optimum for r in range(reps)])
    K, Ns, level = 10, 20, 0.1
    L4 = cert.saa_order_stat_index(K, Ns, fam.eps, level, delta, at_most=True)
    cov4 = np.mean([saa_lower_bound_experiment(fam.program, fam.generator, K, Ns, level, L4, delta,
                                               seed=5000 + r)[0] <= fam.optimum for r in range(reps)])
    ok = cov2 >= floor and cov4 >= floor
    return ok, f"scenario bound (L={L2}) coverage {cov2:.3f}, SAA bound (L={L4}) coverage {cov4:.3f}, floor {floor:.3f}"


# -- 12 ----------------------------------------------------------------------------------

def criterion_12():
    gen = GeneratorSpec.finite_discrete([[0, 0], [0, 1], [1, 0], [1, 1]], [0.25] * 4)
    pts = p_efficient_points(gen, 0.5)
    exact = pts.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    grid = np.linspace(-0.5, 1.5, 21)
    agree = all(cone_union_feasibility_oracle(pts, [a, b], np.asarray) == direct_cdf_feasible(gen, [a, b], 0.5)
                for a in grid for b in grid)
    return exact and agree, f"p-efficient points {pts.tolist()}; cone union agrees with CDF on 21x21 grid: {agree}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}


@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    assert report(number, ok, detail, capsys), detail


if __name__ == "__main__":
    for number, fn in CRITERIA.items():
        report(number, *fn())

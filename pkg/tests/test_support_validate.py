import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from instances import bilinear_instance

from chancekit import certificates as cert
from chancekit.model import GeneratorSpec, ScenarioSet, coordinatewise_program
from chancekit.reformulate import scenario_problem
from chancekit.solvers import solve
from chancekit.support import find_support_scenarios, solve_scenario
from chancekit.validate import (CoordinatewiseMaxFamily, cone_union_feasibility_oracle, direct_cdf_feasible,
                                discard_solve, estimate_violation, lower_bound_experiment, p_efficient_points,
                                saa_lower_bound_experiment, violation_distribution_experiment)


def test_support_single(one_dim):
    rep = find_support_scenarios(one_dim, ScenarioSet(np.array([[0.3], [0.9]])))
    assert rep.support == [1] and rep.count == 1 and not rep.degenerate


def test_support_duplicate_is_degenerate(one_dim):
    rep = find_support_scenarios(one_dim, ScenarioSet(np.array([[0.9], [0.9]])))
    assert rep.count == 0 and rep.degenerate


def test_support_coordinatewise():
    data = np.array([[0.1, 0.2], [0.8, 0.5], [0.3, 0.9], [0.4, 0.1], [0.7, 0.6]])
    rep = find_support_scenarios(coordinatewise_program(2, 0.1), ScenarioSet(data))
    assert rep.support == sorted(np.argmax(data, axis=0).tolist())
    assert rep.count == 2


def test_solve_scenario_attaches_support(one_dim):
    res = solve_scenario(one_dim, ScenarioSet(np.array([[0.3], [0.9]])), support=True)
    assert res.support_set == [1] and res.degenerate is False


@given(st.integers(0, 200))
def test_support_count_at_most_n(seed):
    prog, scen = bilinear_instance(seed)
    if solve(scenario_problem(prog, scen)).optimal:
        assert find_support_scenarios(prog, scen).count <= prog.n


def test_estimate_violation(one_dim):
    gen = GeneratorSpec.uniform_box([0.0], [1.0])
    assert estimate_violation(one_dim, [1.5], gen, 10_000, 0) == (0.0, 0)
    eps_hat, V = estimate_violation(one_dim, [0.9], gen, 100_000, 1)
    assert abs(eps_hat - 0.1) <= 0.003
    assert cert.posterior_violation_bound(100_000, V, 0.05) >= eps_hat


def test_n1_law_pointwise():
    fam = CoordinatewiseMaxFamily(1, 0.05)
    trials, N = 1000, 20
    exp = violation_distribution_experiment(fam, N, trials, seed=5)
    for eps in (0.01, 0.05, 0.1, 0.2):
        p = (1 - eps) ** N
        assert abs(exp.tail(eps) - p) <= 3 * np.sqrt(p * (1 - p) / trials) + 1e-12


def test_single_trial():
    exp = violation_distribution_experiment(CoordinatewiseMaxFamily(2, 0.1), 10, 1, seed=0)
    assert len(exp.records) == 1 and 0.0 <= exp.violations[0] <= 1.0


def test_experiment_deterministic_across_threads(monkeypatch, tmp_path):
    fam = CoordinatewiseMaxFamily(2, 0.1)
    a = violation_distribution_experiment(fam, 30, 12, seed=4).violations
    monkeypatch.setenv("CHANCEKIT_THREADS", "3")
    b = violation_distribution_experiment(fam, 30, 12, seed=4).violations
    assert np.array_equal(a, b)


def test_discard_solve_drops_k():
    fam = CoordinatewiseMaxFamily(2, 0.1)
    scen = ScenarioSet(np.random.default_rng(2).uniform(size=(20, 2)))
    base = solve_scenario(fam.program, scen)
    res, removed = discard_solve(fam.program, scen, 3)
    assert len(removed) == 3 and res.objective <= base.objective
    # removed scenarios are exactly the ones now violated
    viol = np.flatnonzero(fam.program.inner_values(res.x_star, scen.data).max(axis=1) > 1e-9)
    assert set(viol.tolist()) <= set(removed)


def test_lower_bound_trivial_case():
    fam = CoordinatewiseMaxFamily(1, 0.5)
    bound, objs = lower_bound_experiment(fam.program, fam.generator, 1, 5, 1, 0.99, seed=0)
    assert objs.size == 1 and bound == objs[0]
    bound, objs = lower_bound_experiment(fam.program, fam.generator, 8, 3, 1, 0.5, seed=1)
    assert np.all(np.diff(objs) >= 0)
    with pytest.raises(ValueError):
        lower_bound_experiment(fam.program, fam.generator, 8, 3, 8, 0.01, seed=1)


def test_saa_lower_bound_trivial_case():
    fam = CoordinatewiseMaxFamily(2, 0.1)
    delta = cert.saa_order_stat_sum(1, 10, 0.1, 0.1, 1)
    bound, objs = saa_lower_bound_experiment(fam.program, fam.generator, 1, 10, 0.1, 1, delta, seed=0)
    assert objs.size == 1 and bound == objs[0]


FOUR = GeneratorSpec.finite_discrete([[0, 0], [0, 1], [1, 0], [1, 1]], [0.25] * 4)


def test_p_efficient_examples():
    assert p_efficient_points(FOUR, 0.5).tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert p_efficient_points(FOUR, 1.0).tolist() == [[1.0, 1.0]]
    one = GeneratorSpec.finite_discrete([[1], [2], [3], [4]], [0.25] * 4)
    assert p_efficient_points(one, 0.5).tolist() == [[2.0]]


@given(st.integers(0, 1000), st.floats(0.05, 1.0))
def test_p_efficient_antichain(seed, p):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 4, size=(6, 2)).astype(float)
    gen = GeneratorSpec.finite_discrete(pts, np.full(6, 1 / 6))
    eff = p_efficient_points(gen, p)
    for u in eff:
        assert direct_cdf_feasible(gen, u, p)
        for v in eff:
            assert not (np.all(u <= v) and np.any(u < v))


def test_cone_union_agrees_on_grid():
    pts = p_efficient_points(FOUR, 0.5)
    for a in np.linspace(-0.5, 1.5, 9):
        for b in np.linspace(-0.5, 1.5, 9):
            v = np.array([a, b])
            assert cone_union_feasibility_oracle(pts, v, lambda x: x) == direct_cdf_feasible(FOUR, v, 0.5)
    assert cone_union_feasibility_oracle(pts, [1.0, 1.0], lambda x: np.asarray(x))
    assert not cone_union_feasibility_oracle(pts, [-0.1, 0.5], lambda x: np.asarray(x))

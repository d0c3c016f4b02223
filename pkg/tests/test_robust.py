import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chancekit.model import CCProgram, CCRow, GeneratorSpec, ScenarioSet
from chancekit.reformulate import scenario_problem
from chancekit.robust import (DirectionalDeviations, UncertaintySetSpec, ball_radius, box_polytope, budget_gamma,
                              directional_deviations, pi_bound_program, pi_cvar_bound, pi_value,
                              robust_counterpart, uncertainty_set_from_pi)
from chancekit.solvers import solve

rng_vec = st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=3)


def fixed_x_program():
    """Decision (x0, x1..x3) with x fixed at ones; row x0 + xi^T x <= 0, maximize x0."""
    A = np.zeros((3, 4))
    A[:, 1:] = np.eye(3)
    row = CCRow([1.0, 0, 0, 0], 0.0, A, np.zeros(3))
    return CCProgram([-1.0, 0, 0, 0], [row], 0.05, lower=[-100, 1, 1, 1], upper=[100, 1, 1, 1])


def test_box_one_dim():
    prog = CCProgram([-1.0], [CCRow.separable([1.0], 0.0, [1.0])], 0.05, lower=[-10.0], upper=[10.0])
    res = solve(robust_counterpart(prog, UncertaintySetSpec.box()))
    assert res.x_star[0] == pytest.approx(-1.0, abs=1e-12)


def test_ball_closed_form():
    r = ball_radius(0.05)
    assert r == pytest.approx(2.44775, abs=1e-5)
    res = solve(robust_counterpart(fixed_x_program(), UncertaintySetSpec.ball(r)))
    assert res.x_star[0] == pytest.approx(-r * math.sqrt(3), abs=1e-5)


def test_budget_gamma():
    assert budget_gamma(4, 0.05) == pytest.approx(4.8955, abs=1e-4)


def test_radii():
    assert UncertaintySetSpec.U3(np.eye(2), 0.5).radius == pytest.approx(1.0)
    assert UncertaintySetSpec.U4([1.0], [1.0], 0.05).radius == pytest.approx(2.44775, abs=1e-5)


@given(rng_vec)
def test_support_functions(y):
    y = np.array(y)
    r = 1.7
    assert UncertaintySetSpec.box().support(y) == pytest.approx(np.abs(y).sum())
    assert UncertaintySetSpec.ball(r).support(y) == pytest.approx(r * np.linalg.norm(y))
    # ball-box support is the smaller of the two
    bb = UncertaintySetSpec.ball_box(r).support(y)
    assert bb <= min(np.abs(y).sum(), r * np.linalg.norm(y)) + 1e-9


@pytest.mark.parametrize("kind", ["box", "ball", "ball_box", "budget"])
def test_counterpart_value_matches_support(kind):
    r = {"box": None, "ball": 1.3, "ball_box": 1.3, "budget": 1.5}[kind]
    uset = UncertaintySetSpec.box() if r is None else getattr(UncertaintySetSpec, kind)(r)
    res = solve(robust_counterpart(fixed_x_program(), uset))
    assert res.x_star[0] == pytest.approx(-uset.support(np.ones(3)), abs=1e-6)


def test_deviations_closed_form():
    dev = directional_deviations(GeneratorSpec.gaussian([0.0, 0.0], [[4.0, 0.0], [0.0, 1.0]]))
    assert dev.delta_plus == pytest.approx([2.0, 1.0], abs=1e-6)
    assert dev.delta_minus == pytest.approx([2.0, 1.0], abs=1e-6)
    dev = directional_deviations(GeneratorSpec.scaled_bernoulli([1.0]))
    assert dev.delta_plus == pytest.approx([1.0], abs=1e-6)


def test_deviation_infinite_tail():
    # centred exponential: log E exp(theta (E - 1)) = -log(1 - theta) - theta for theta < 1
    f = lambda th: (-math.log(1 - th) - th) if th < 1 else math.inf
    dev = directional_deviations([f])
    assert math.isinf(dev.delta_plus[0]) and dev.I_plus == (0,)
    assert dev.delta_minus[0] == pytest.approx(1.0, abs=1e-3)


def test_pi3_with_slack():
    y = np.array([0.6, -1.1, 0.4])
    Sig = np.diag([1.0, 0.5, 2.0])
    bound = pi_value(3, 0.0, y, Sigma=Sig)
    assert bound == pytest.approx(0.5 * math.sqrt(y @ Sig @ y))
    xi = np.random.default_rng(0).multivariate_normal(np.zeros(3), Sig, size=1_000_000)
    vals = np.maximum(xi @ y, 0.0)
    assert vals.mean() + 3 * vals.std() / 1000 <= bound


def test_pi1_box_hinge():
    H, h = box_polytope(3)
    y = np.array([1.0, -2.0, 0.5])
    assert pi_value(1, -1.0, y, W=(H, h)) == pytest.approx(max(-1.0 + 3.5, 0.0))
    assert pi_value(1, -5.0, y, W=(H, h)) == 0.0


@pytest.mark.parametrize("which", [1, 2, 3, 4, 5])
@given(x0=st.floats(-3, 3))
def test_pi_at_zero_direction(which, x0):
    H, h = box_polytope(2)
    dev = DirectionalDeviations(np.ones(2), np.ones(2))
    val = pi_value(which, x0, np.zeros(2), W=(H, h), Sigma=np.eye(2), deviations=dev)
    assert val == pytest.approx(max(x0, 0.0), abs=1e-12)


@pytest.mark.parametrize("which", [1, 2, 3, 4, 5])
def test_pi_equals_uncertainty_set(which):
    rng = np.random.default_rng(which)
    d, eps = 3, 0.1
    ctx = dict(W=box_polytope(d), Sigma=np.cov(rng.normal(size=(10, d)).T),
               deviations=DirectionalDeviations(rng.uniform(0.5, 2, d), rng.uniform(0.5, 2, d)))
    U = uncertainty_set_from_pi(which, eps, **ctx)
    for _ in range(20):
        x0, y = rng.normal(), rng.normal(size=d)
        assert pi_cvar_bound(which, x0, y, eps, **ctx) == pytest.approx(x0 + U.support(y), abs=1e-6)


@pytest.mark.parametrize("which", [1, 2, 3, 4, 5])
def test_pi_program_matches_counterpart(which):
    d = 3
    row = CCRow(np.zeros(3), -1.0, np.diag([0.2, 0.5, 0.9]), np.zeros(d))
    prog = CCProgram(-np.array([1.0, 1.2, 1.4]), [row], 0.1, lower=np.zeros(3), upper=np.full(3, 5.0))
    ctx = dict(W=box_polytope(d), Sigma=np.eye(d) / 3,
               deviations=DirectionalDeviations(np.full(d, 3 ** -0.5), np.full(d, 3 ** -0.5)))
    a = solve(pi_bound_program(prog, which, **ctx))
    b = solve(robust_counterpart(prog, uncertainty_set_from_pi(which, 0.1, **ctx)))
    assert a.optimal and b.optimal
    assert a.objective == pytest.approx(b.objective, abs=1e-5)


def test_u4_rejects_bad_signs():
    dev = DirectionalDeviations(np.array([np.inf]), np.array([1.0]))
    with pytest.raises(ValueError):
        pi_value(4, 0.0, np.array([1.0]), deviations=dev)
    assert math.isinf(UncertaintySetSpec.U4(dev.delta_plus, dev.delta_minus, 0.1).support(np.array([1.0])))


@pytest.mark.parametrize("kind", ["box", "ball", "budget"])
def test_safe_approximation_ordering(kind):
    # scenarios drawn inside the box stay inside ball(r >= sqrt d) and budget(d) too
    d = 3
    rng = np.random.default_rng(7)
    row = CCRow(np.array([-1.0, 0.0]), 0.0, 0.3 * rng.normal(size=(d, 2)), rng.uniform(0.2, 1, d))
    prog = CCProgram([1.0, 0.5], [row], 0.05, lower=[-5.0, -5.0], upper=[5.0, 5.0])
    uset = {"box": UncertaintySetSpec.box(), "ball": UncertaintySetSpec.ball(math.sqrt(d)),
            "budget": UncertaintySetSpec.budget(float(d))}[kind]
    scen = ScenarioSet(rng.uniform(-1, 1, size=(30, d)))
    ro = solve(robust_counterpart(prog, uset))
    sp = solve(scenario_problem(prog, scen))
    assert ro.objective >= sp.objective - 1e-9
    assert np.all(prog.inner_values(ro.x_star, scen.data) <= 1e-7)


@pytest.mark.parametrize("seed", range(10))
def test_ball_box_support_against_nlp(seed):
    from scipy.optimize import minimize
    rng = np.random.default_rng(seed)
    d = 4
    y, r = rng.normal(size=d) * rng.choice([1e-3, 1.0, 10.0], size=d), rng.uniform(0.3, 1.9)
    cons = [{"type": "ineq", "fun": lambda x: r * r - x @ x}]
    best = max(-minimize(lambda x: -(x @ y), rng.uniform(-1, 1, d) * r / 2, jac=lambda x: -y,
                         bounds=[(-1, 1)] * d, constraints=cons, method="SLSQP",
                         options={"ftol": 1e-14, "maxiter": 500}).fun for _ in range(4))
    assert UncertaintySetSpec.ball_box(r).support(y) == pytest.approx(best, rel=1e-8, abs=1e-10)

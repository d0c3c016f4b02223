from pathlib import Path

import numpy as np
import pytest

from instances import bilinear_instance, separable_instance

from chancekit.lpformat import from_lp_string, read_lp, to_lp_string, write_lp
from chancekit.model import CCProgram, CCRow, GaussianCC, ScenarioSet
from chancekit.reformulate import cvar_sample, gaussian_socp, saa_bigM, saa_separable_strong, scenario_problem
from chancekit.robust import UncertaintySetSpec, robust_counterpart
from chancekit.solvers import solve

DATA = Path(__file__).parent / "data"


def n2_program():
    prog = CCProgram([1.0], [CCRow.separable([-1.0], 0.0, [1.0])], 0.05, lower=[0.0], upper=[2.0])
    return scenario_problem(prog, ScenarioSet(np.array([[0.3], [0.9]])))


def test_golden_scenario_file():
    assert to_lp_string(n2_program()) == (DATA / "scenario_n2.lp").read_text()


def programs():
    prog, scen, level, _ = separable_instance(3)
    bil, bscen = bilinear_instance(4, N=6)
    gcc = GaussianCC([-1.0, 0.5], [1.0], [[0.2, -0.1]], 0.3, [0.1], [[1.5]], 0.05)
    ro_prog = CCProgram([-1.0, -0.7], [CCRow([0.0, 0.0], -1.0, np.eye(2), np.zeros(2))], 0.1,
                        lower=[0.0, 0.0], upper=[5.0, 5.0])
    return {
        "scenario": scenario_problem(bil, bscen),
        "saa": saa_bigM(prog, scen, level),
        "saa_strong": saa_separable_strong(prog, scen, level),
        "cvar": cvar_sample(bil, bscen),
        "gaussian": gaussian_socp(gcc, [1.0, 1.0], [-5, -5], [5, 5]),
        "ball": robust_counterpart(ro_prog, UncertaintySetSpec.ball(1.3)),
        "budget": robust_counterpart(ro_prog, UncertaintySetSpec.budget(1.5)),
    }


@pytest.mark.parametrize("name", list(programs()))
def test_round_trip(name, tmp_path):
    dp = programs()[name]
    path = tmp_path / f"{name}.lp"
    written = write_lp(dp, path)
    side = Path(str(path) + ".soc.json")
    assert side.exists() == bool(dp.soc_rows)
    assert len(written) == 1 + bool(dp.soc_rows)
    back = read_lp(path)
    assert back.names == dp.names and back.kinds == dp.kinds and back.provenance == dp.provenance
    a, b = solve(dp), solve(back)
    assert a.status == b.status
    if a.optimal:
        assert abs(a.objective - b.objective) <= 1e-9
    # re-emission is byte stable
    assert to_lp_string(back) == path.read_text()


def test_sidecar_removed_when_cones_disappear(tmp_path):
    path = tmp_path / "p.lp"
    write_lp(programs()["gaussian"], path)
    assert Path(str(path) + ".soc.json").exists()
    write_lp(n2_program(), path)
    assert not Path(str(path) + ".soc.json").exists()


def test_free_and_one_sided_bounds():
    text = to_lp_string(programs()["cvar"])
    assert " t free" in text
    assert " s1 >= 0.0" in text
    back = from_lp_string(text)
    assert np.isinf(back.lower[back.names.index("t")])


def test_long_rows_wrap():
    prog, scen, level, _ = separable_instance(0)
    text = to_lp_string(saa_bigM(prog, scen, level))
    assert all(len(line) < 510 for line in text.splitlines())

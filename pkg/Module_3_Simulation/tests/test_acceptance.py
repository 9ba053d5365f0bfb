"""
Full-length runs of the shipped scenarios. Each takes on the order of a
minute, so they only run with `pytest --runslow`.
"""

from pathlib import Path

import numpy as np
import pytest

from Module_1_Ring_Model.ring_geometry import RingConfig
from Module_1_Ring_Model.potentials import PotentialConfig
from Module_2_Cruise_Controllers.controllers import CruiseController
from Module_2_Cruise_Controllers.clf import ResolutionError, dissipation_residual
from Module_3_Simulation.scenario import InitSpec, load_scenario
from Module_3_Simulation.sampler import sample_initial_fleet
from Module_3_Simulation.runner import run_scenario, build_controller
from Module_3_Simulation.verification import cross_model_error

SCENARIOS = Path(__file__).resolve().parents[2] / "Combined_Demo_Tool" / "scenarios"
SHIPPED = ["ncc_inviscid", "ncc_viscous", "prcc_inviscid", "prcc_viscous"]


@pytest.mark.slow
@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_scenario_is_safe_and_converges(name, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    result = run_scenario(load_scenario(str(SCENARIOS / f"{name}.json")))
    assert result.passed, result.violation
    assert all(m > 0 for m in result.margins.values()), result.margins
    assert result.metrics.summary()["min_gap"] > 6.0
    conv = result.convergence()
    assert conv["converged"], conv
    clf = result.record.clf
    assert np.all(np.diff(clf) <= 1e-6 * np.maximum(1.0, clf[:-1]))
    assert result.metrics.equilibrium_residual[-1] < 1e-2


@pytest.mark.slow
@pytest.mark.parametrize("family", ["ncc", "prcc"])
@pytest.mark.parametrize("q2", [0.0, 0.1])
def test_dissipation_oracle_on_many_states(family, q2):
    checked = 0
    for n in (2, 3, 5):
        cfg = RingConfig(n=n)
        ctrl = CruiseController(cfg, PotentialConfig(q2=q2), family)
        negative = ctrl.negative_control()
        for seed in range(334):
            w = sample_initial_fleet(InitSpec(seed=10_000 + seed), cfg)
            try:
                assert dissipation_residual(w, ctrl).holds()
                assert not dissipation_residual(w, negative).holds()
            except ResolutionError:
                continue
            checked += 1
    assert checked >= 990


@pytest.mark.slow
def test_cross_model_oracle_over_ten_seconds():
    sc = load_scenario(str(SCENARIOS / "ncc_viscous.json"))
    w = sample_initial_fleet(sc.init, sc.ring)
    assert cross_model_error(build_controller(sc), w, horizon=10.0, dt=1e-3) <= 1e-6


@pytest.mark.slow
def test_halving_dt_keeps_end_state_metrics(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    coarse = load_scenario(str(SCENARIOS / "ncc_inviscid.json"))
    fine = load_scenario(str(SCENARIOS / "ncc_inviscid.json"))
    fine.integrator.dt = 5e-4
    fine.integrator.record_every = 200
    fine.monitors.dissipation_every = 200
    a, b = run_scenario(coarse).metrics, run_scenario(fine).metrics
    for key in ("sup_angular_error", "sup_accel", "sup_orientation"):
        assert abs(a.at(200.0)[key] - b.at(200.0)[key]) < 1e-6

import json
import math

import pytest

from Module_1_Ring_Model.ring_geometry import RingConfig, FleetState, StateSpaceError
from Module_1_Ring_Model.potentials import PotentialConfig
from Module_1_Ring_Model import utils
from Module_2_Cruise_Controllers.controllers import CruiseController
from Module_2_Cruise_Controllers.clf import (
    newtonian_energy, relativistic_energy, clf_value, clf_from_terms, dissipation_residual,
    radial_gradient_fd, DissipationResult, ResolutionError,
)


def _interacting():
    # vehicles 0-1 and 1-2 are within lam, 0-2 are not
    return FleetState(r=[38.0, 42.0, 40.0], phi=[0.0, 0.3, 0.6], s=[0.05, -0.03, 0.02], v=[5.0, 6.5, 7.0])


def _sampled(seed):
    from Module_3_Simulation.sampler import sample_initial_fleet
    from Module_3_Simulation.scenario import InitSpec
    return sample_initial_fleet(InitSpec(seed=seed), RingConfig(n=3))


def test_newtonian_energy_examples():
    cfg = RingConfig(n=1)
    H = newtonian_energy(FleetState(r=[40.0], phi=[0.0], s=[0.0], v=[5.0]), cfg, PotentialConfig())
    assert H.total == pytest.approx(3.125e-4, rel=1e-12)
    assert H.potential_boundary == 0.0 and H.orientation_penalty == 0.0
    eq = newtonian_energy(FleetState(r=[40.0], phi=[2.0], s=[0.0], v=[6.0]), cfg, PotentialConfig())
    assert eq.total == pytest.approx(0.0, abs=1e-15)


def test_relativistic_energy_kinetic_term():
    cfg = RingConfig(n=1)
    H = relativistic_energy(FleetState(r=[40.0], phi=[0.0], s=[0.0], v=[5.0]), cfg, PotentialConfig())
    assert H.kinetic_rotational == pytest.approx(1.25e-5, rel=1e-12)
    w = FleetState(r=[40.0], phi=[0.0], s=[0.0], v=[9.9])
    assert clf_value("prcc", w, cfg, PotentialConfig()).total > clf_value("ncc", w, cfg, PotentialConfig()).total


def test_relativistic_kinetic_term_grows_at_both_speed_limits():
    cfg, pcfg = RingConfig(n=1), PotentialConfig()

    def kinetic(v):
        return relativistic_energy(FleetState(r=[40.0], phi=[0.0], s=[0.05], v=[v]), cfg, pcfg).kinetic_rotational

    towards_zero = [kinetic(10.0 ** -k) for k in range(1, 7)]
    towards_vmax = [kinetic(cfg.v_max - 10.0 ** -k) for k in range(1, 7)]
    assert all(b > a for a, b in zip(towards_zero, towards_zero[1:]))
    assert all(b > a for a, b in zip(towards_vmax, towards_vmax[1:]))
    assert towards_zero[-1] > 1e3 and towards_vmax[-1] > 1e3


def test_orientation_penalty_grows_towards_theta():
    cfg = RingConfig(n=1)
    values = [newtonian_energy(FleetState(r=[40.0], phi=[0.0], s=[s], v=[6.0]), cfg, PotentialConfig()).total
              for s in (0.0, 0.1, 0.16, 0.169, 0.1699)]
    assert values == sorted(values)
    assert values[-1] > 100 * values[1]


def test_energy_outside_omega_raises():
    cfg = RingConfig(n=1)
    with pytest.raises(StateSpaceError):
        newtonian_energy(FleetState(r=[40.0], phi=[0.0], s=[0.0], v=[10.0]), cfg, PotentialConfig())


def test_energy_is_rotation_invariant():
    cfg = RingConfig(n=3)
    w = _interacting()
    turned = w.replace(phi=w.phi + 1.3)
    for kind in ("ncc", "prcc"):
        a = clf_value(kind, w, cfg, PotentialConfig())
        b = clf_value(kind, turned, cfg, PotentialConfig())
        assert a.total == pytest.approx(b.total, rel=1e-12)
        assert a.potential_pairwise > 0


def test_clf_from_terms_matches_direct_evaluation():
    cfg, pcfg = RingConfig(n=3), PotentialConfig(q2=0.1)
    w = _interacting()
    for kind in ("ncc", "prcc"):
        ctrl = CruiseController(cfg, pcfg, kind)
        assert clf_from_terms(kind, w, ctrl.evaluate(w), cfg, pcfg).total == \
            pytest.approx(clf_value(kind, w, cfg, pcfg).total, rel=1e-14)


@pytest.mark.parametrize("kind", ["ncc", "prcc"])
@pytest.mark.parametrize("q2", [0.0, 0.1])
def test_dissipation_certificate_on_interacting_fleet(kind, q2):
    cfg = RingConfig(n=3)
    ctrl = CruiseController(cfg, PotentialConfig(q2=q2), kind)
    res = dissipation_residual(_interacting(), ctrl)
    assert res.holds()
    assert res.dH_dt_fd < 0
    assert res.margin >= -1e-6


@pytest.mark.parametrize("kind", ["ncc", "prcc"])
@pytest.mark.parametrize("seed", [1000, 1001, 1002])
def test_dissipation_certificate_on_seeded_fleets(kind, seed):
    cfg = RingConfig(n=3)
    ctrl = CruiseController(cfg, PotentialConfig(), kind)
    assert dissipation_residual(_sampled(seed), ctrl).holds()


def test_viscous_rate_is_below_inviscid_rate():
    cfg, w = RingConfig(n=3), _interacting()
    dry = dissipation_residual(w, CruiseController(cfg, PotentialConfig(q2=0.0), "prcc"))
    wet = dissipation_residual(w, CruiseController(cfg, PotentialConfig(q2=0.1), "prcc"))
    # kappa contributes a non-negative dissipation term on top of the bound
    assert wet.exact_rate <= wet.analytic_bound
    assert dry.exact_rate == pytest.approx(dry.analytic_bound, rel=1e-12)


@pytest.mark.parametrize("kind", ["ncc", "prcc"])
def test_sign_flipped_controller_is_rejected(kind):
    cfg = RingConfig(n=1)
    for w in (FleetState(r=[45.0], phi=[0.0], s=[0.1], v=[9.0]),
              FleetState(r=[52.0], phi=[0.0], s=[-0.08], v=[7.0])):
        ctrl = CruiseController(cfg, PotentialConfig(), kind)
        assert dissipation_residual(w, ctrl).holds()
        assert not dissipation_residual(w, ctrl.negative_control()).holds()


def test_dissipation_check_event(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    utils.reset_events()
    ctrl = CruiseController(RingConfig(n=3), PotentialConfig(), "ncc")
    dissipation_residual(_interacting(), ctrl, t=0.0, emit=True)
    with open(tmp_path / "events.log", encoding="utf-8") as f:
        event = json.loads(f.readline())
    assert event["type"] == "dissipation_check"
    assert event["controller"] == "ncc_inviscid" and event["t"] == 0.0


def test_holds_allows_round_off_only():
    ok = DissipationResult(dH_dt_fd=-1.0, analytic_bound=-1.0, exact_rate=-1.0 - 5e-7, margin=0.0,
                           identity_error=5e-7, H=1.0)
    assert ok.holds()
    bad = DissipationResult(dH_dt_fd=-1.0, analytic_bound=-1.0, exact_rate=-1.1, margin=0.0,
                            identity_error=0.1, H=1.0, noise=1e-8)
    assert not bad.holds()


@pytest.mark.parametrize("kind", ["ncc", "prcc"])
def test_radial_gradient_matches_controller_term(kind):
    cfg, pcfg = RingConfig(n=3), PotentialConfig()
    ctrl = CruiseController(cfg, pcfg, kind)
    for w in (_interacting(), _sampled(1000)):
        terms = ctrl.evaluate(w)
        for i in range(w.n):
            fd = radial_gradient_fd(kind, w, i, cfg, pcfg)
            assert -fd == pytest.approx(terms.radial[i], rel=1e-5, abs=1e-6)


def test_radial_gradient_near_the_boundary():
    cfg, pcfg = RingConfig(n=1), PotentialConfig()
    w = FleetState(r=[55.0], phi=[0.0], s=[0.0], v=[8.0])
    terms = CruiseController(cfg, pcfg, "ncc").evaluate(w)
    fd = radial_gradient_fd("ncc", w, 0, cfg, pcfg)
    assert terms.radial[0] < 0
    assert -fd == pytest.approx(terms.radial[0], rel=1e-6)
    assert math.isfinite(fd)


@pytest.mark.parametrize("kind", ["ncc", "prcc"])
def test_coarse_step_is_reported_as_unresolved(kind):
    ctrl = CruiseController(RingConfig(n=3), PotentialConfig(), kind)
    with pytest.raises(ResolutionError, match="disagree"):
        dissipation_residual(_interacting(), ctrl, h=0.01)
    assert dissipation_residual(_interacting(), ctrl).holds()

import json

import numpy as np
import pytest

from Module_1_Ring_Model.ring_geometry import RingConfig, StateSpaceError, ConfigError
from Module_1_Ring_Model.potentials import (
    PotentialConfig, PotentialFamily, ShapingFunctions, vehicle_potential, boundary_potential,
    viscosity_kernel, gain_shaping_f, gain_shaping_df, shaping_defaults, default_family,
    check_axioms, validate_potentials,
)
from Module_1_Ring_Model import utils


def test_vehicle_potential_examples():
    assert vehicle_potential(20.0, 6.0, 20.0, 3e-3) == (0.0, 0.0, 0.0)
    V, _, _ = vehicle_potential(13.0, 6.0, 20.0, 3e-3)
    assert V == pytest.approx(0.147, rel=1e-12)
    near, _, _ = vehicle_potential(6.0 + 1e-6, 6.0, 20.0, 3e-3)
    assert near == pytest.approx(3e-3 * 14.0 ** 3 / 1e-6, rel=1e-5)
    with pytest.raises(StateSpaceError):
        vehicle_potential(6.0, 6.0, 20.0, 3e-3)


def test_vehicle_potential_derivatives_match_finite_differences():
    h = 1e-5
    for d in np.linspace(6.5, 19.5, 27):
        _, dV, d2V = vehicle_potential(d, 6.0, 20.0, 3e-3)
        fd1 = (vehicle_potential(d + h, 6.0, 20.0, 3e-3)[0] - vehicle_potential(d - h, 6.0, 20.0, 3e-3)[0]) / (2 * h)
        fd2 = (vehicle_potential(d + h, 6.0, 20.0, 3e-3)[1] - vehicle_potential(d - h, 6.0, 20.0, 3e-3)[1]) / (2 * h)
        assert dV == pytest.approx(fd1, rel=1e-6, abs=1e-9)
        assert d2V == pytest.approx(fd2, rel=1e-6, abs=1e-9)
        assert dV < 0


def test_vehicle_potential_vectorized_matches_scalar():
    d = np.array([7.0, 13.0, 25.0])
    V, dV, _ = vehicle_potential(d, 6.0, 20.0, 3e-3)
    assert V[1] == pytest.approx(0.147)
    assert V[2] == 0.0 and dV[2] == 0.0


def test_boundary_potential_examples():
    assert boundary_potential(40.0, 20.0, 60.0, 10.0) == (0.0, 0.0)
    assert boundary_potential(45.0, 20.0, 60.0, 10.0)[0] == 0.0
    U, dU = boundary_potential(55.0, 20.0, 60.0, 10.0)
    assert U == pytest.approx(1953125.0 / 175.0, rel=1e-12)
    assert dU > 0
    assert boundary_potential(25.0, 20.0, 60.0, 10.0)[1] < 0
    with pytest.raises(StateSpaceError):
        boundary_potential(60.0, 20.0, 60.0, 10.0)


def test_boundary_potential_derivative_matches_finite_differences():
    h = 1e-6
    for r in np.linspace(21.0, 59.0, 39):
        _, dU = boundary_potential(r, 20.0, 60.0, 10.0)
        fd = (boundary_potential(r + h, 20.0, 60.0, 10.0)[0] - boundary_potential(r - h, 20.0, 60.0, 10.0)[0]) / (2 * h)
        assert dU == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_viscosity_kernel_examples():
    assert viscosity_kernel(20.0, 6.0, 20.0, 0.1) == (0.0, 0.0)
    assert viscosity_kernel(30.0, 6.0, 20.0, 0.1) == (0.0, 0.0)
    assert viscosity_kernel(10.0, 6.0, 20.0, 0.1)[0] == pytest.approx(10.0)
    k, dk = viscosity_kernel(np.linspace(7, 30, 24), 6.0, 20.0, 0.0)
    assert np.all(k == 0) and np.all(dk == 0)


def test_gain_shaping_examples():
    assert gain_shaping_f(-0.3, 0.2) == 0.0
    assert gain_shaping_f(0.0, 0.2) == pytest.approx(0.1)
    assert gain_shaping_f(1.0, 0.2) == pytest.approx(1.1)
    # C^1 across both joins
    for x0 in (-0.2, 0.0):
        assert gain_shaping_f(x0 - 1e-9, 0.2) == pytest.approx(gain_shaping_f(x0 + 1e-9, 0.2), abs=1e-8)
        assert gain_shaping_df(x0 - 1e-9, 0.2) == pytest.approx(gain_shaping_df(x0 + 1e-9, 0.2), abs=1e-7)


def test_shaping_defaults():
    sh = shaping_defaults(PotentialConfig())
    assert sh.f1(0.0) == 0.0
    assert sh.f2(0.5) == pytest.approx(50.0)
    assert sh.g1(-3.0) == -3.0
    assert sh.f(0.0) == pytest.approx(0.1)


def test_published_family_passes_every_axiom(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    utils.reset_events()
    cfg = RingConfig()
    report = check_axioms(default_family(cfg, PotentialConfig(q2=0.1)), cfg)
    assert report.passed, report.failures
    assert "V_blowup" in report.checked and "U_blowup" in report.checked
    with open(tmp_path / "events.log", encoding="utf-8") as f:
        event = json.loads(f.readline())
    assert event["type"] == "axiom_check" and event["passed"] is True


def test_sign_flipped_potential_fails(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = RingConfig()
    pcfg = PotentialConfig()

    def flipped(d, L, lam, i, j):
        V, dV, d2V = vehicle_potential(d, L, lam, pcfg.q1)
        return -V, -dV, -d2V

    report = check_axioms(PotentialFamily(cfg, pcfg, V_fn=flipped), cfg)
    assert not report.passed
    assert {"V_blowup", "V_nonnegative"} <= set(report.failed_axioms())


def test_kernel_with_support_beyond_interaction_radius_fails(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = RingConfig()
    pcfg = PotentialConfig(q2=0.1)

    def wide(d, L, lam, i, j):
        return viscosity_kernel(d, L, lam + 5.0, pcfg.q2)

    report = check_axioms(PotentialFamily(cfg, pcfg, kappa_fn=wide), cfg)
    assert report.failed_axioms() == ["kappa_zero_beyond_lambda"]


def test_bad_shaping_functions_fail(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = RingConfig()
    pcfg = PotentialConfig()
    shaping = ShapingFunctions(g1=lambda x: -x, f=lambda x: 0.0 * x, f1=lambda x: -x)
    report = check_axioms(PotentialFamily(cfg, pcfg, shaping=shaping), cfg)
    assert {"g_nondecreasing", "f_dominates_ramp", "f_j_sign"} <= set(report.failed_axioms())


def test_pair_arrays_mask_and_gap_error():
    cfg = RingConfig(n=3)
    fam = default_family(cfg, PotentialConfig(q2=0.1))
    d = np.array([[0.0, 13.0, 25.0], [13.0, 0.0, 10.0], [25.0, 10.0, 0.0]])
    V, dV, K = fam.pair_arrays(d)
    assert V[0, 1] == pytest.approx(0.147) and V[0, 2] == 0.0 and V[0, 0] == 0.0
    assert K[1, 2] == pytest.approx(10.0)
    assert np.allclose(V, V.T) and np.allclose(K, K.T)
    d[0, 1] = d[1, 0] = 5.0
    with pytest.raises(StateSpaceError):
        fam.pair_arrays(d)


def test_validate_potentials(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = RingConfig()
    validate_potentials(PotentialConfig(), cfg)
    with pytest.raises(ConfigError) as exc:
        validate_potentials(PotentialConfig(c=25.0, b=1e-3), cfg)
    names = {i.name for i in exc.value.issues}
    assert names == {"c < (R_out - R_in)/2", "b > 1/R_in^2"}

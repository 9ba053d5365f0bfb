import json
import math

import numpy as np
import pytest

from Module_1_Ring_Model.ring_geometry import (
    RingConfig, VehicleState, FleetState, ConfigError, StateSpaceError,
    weighted_distance, distance_matrix, check_state_space, require_member, validate_config,
    polar_from_cartesian, cartesian_from_polar, off_diagonal,
)
from Module_1_Ring_Model import utils


def test_weighted_distance_examples():
    a = VehicleState(r=30, phi=0.0, s=0, v=5)
    assert weighted_distance(a, a, 5.11) == 0.0
    b = VehicleState(r=30, phi=math.pi, s=0, v=5)
    assert weighted_distance(a, b, 1.0) == pytest.approx(60.0, rel=1e-12)
    c = VehicleState(r=40, phi=1.0, s=0, v=5)
    d = VehicleState(r=30, phi=1.0, s=0, v=5)
    assert weighted_distance(c, d, 5.11) == pytest.approx(math.sqrt(511.0), rel=1e-12)


def test_weighted_distance_symmetric_and_euclidean_for_unit_weight():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = VehicleState(rng.uniform(20, 60), rng.uniform(-10, 10), 0.0, 5.0)
        b = VehicleState(rng.uniform(20, 60), rng.uniform(-10, 10), 0.0, 5.0)
        assert weighted_distance(a, b, 5.11) == weighted_distance(b, a, 5.11)
        xa, ya, _, _ = cartesian_from_polar(a)
        xb, yb, _, _ = cartesian_from_polar(b)
        assert weighted_distance(a, b, 1.0) == pytest.approx(math.hypot(xa - xb, ya - yb), rel=1e-10)


def test_distance_matrix_matches_pairwise():
    cfg = RingConfig(n=3)
    w = FleetState(r=[30, 40, 50], phi=[0.0, 0.4, 2.0], s=[0, 0, 0], v=[5, 5, 5])
    d = distance_matrix(w, cfg)
    assert np.allclose(d, d.T)
    assert np.all(np.diag(d) == 0)
    assert d[0, 1] == pytest.approx(weighted_distance(w.vehicle(0), w.vehicle(1), 5.11), rel=1e-12)


def test_single_vehicle_member():
    cfg = RingConfig(n=1)
    report = check_state_space(FleetState(r=[40], phi=[0], s=[0], v=[5]), cfg)
    assert report.member
    assert all(m > 0 for m in report.margins.values())


def test_pair_gap_violation_listed():
    cfg = RingConfig(n=2, p=1.0)
    # same angle, radial separation 5.9 with p=1 gives d = 5.9 < L = 6
    w = FleetState(r=[30.0, 35.9], phi=[0, 0], s=[0, 0], v=[5, 5])
    report = check_state_space(w, cfg)
    assert not report.member
    gap = [v for v in report.violations if v.constraint == "d_ij > L_ij"]
    assert len(gap) == 1 and gap[0].vehicles == (0, 1)
    assert gap[0].margin == pytest.approx(-0.1, abs=1e-9)


def test_speed_at_limit_is_not_member_and_all_violations_reported():
    cfg = RingConfig(n=1)
    w = FleetState(r=[20.0], phi=[0], s=[0.17], v=[10.0])
    report = check_state_space(w, cfg)
    assert not report.member
    names = {v.constraint for v in report.violations}
    assert names == {"r > R_in", "v < v_max", "|s| < Theta"}
    with pytest.raises(StateSpaceError):
        require_member(w, cfg)


def test_wrong_fleet_size_rejected():
    with pytest.raises(StateSpaceError):
        check_state_space(FleetState(r=[40], phi=[0], s=[0], v=[5]), RingConfig(n=2))


def test_validate_config_accepts_published_values(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = validate_config(RingConfig())
    assert math.cos(cfg.Theta) > 0.9


def test_validate_config_rejects_theta_and_setpoint(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    utils.reset_events()
    with pytest.raises(ConfigError) as exc:
        validate_config(RingConfig(Theta=0.48))
    names = [i.name for i in exc.value.issues]
    assert names == ["cos(Theta) > R_out*omega_star/v_max"]
    assert exc.value.issues[0].lhs == pytest.approx(math.cos(0.48))
    assert exc.value.issues[0].rhs == pytest.approx(0.9)

    with pytest.raises(ConfigError) as exc:
        validate_config(RingConfig(omega_star=10.0 / 60.0))
    assert "omega_star < v_max/R_out" in [i.name for i in exc.value.issues]

    with open(tmp_path / "events.log", encoding="utf-8") as f:
        types = [json.loads(line)["type"] for line in f]
    assert types == ["config_rejected", "config_rejected"]


def test_validate_config_lists_every_issue(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigError) as exc:
        validate_config(RingConfig(L=25.0, p=-1.0, Theta=2.0))
    names = {i.name for i in exc.value.issues}
    assert {"p_ij > 0", "lambda > max L_ij", "0 < Theta < pi/2"} <= names


def test_small_weight_warns_but_is_accepted(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    utils.reset_events()
    validate_config(RingConfig(p=0.5))
    with open(tmp_path / "events.log", encoding="utf-8") as f:
        events = [json.loads(line) for line in f]
    assert events[0]["type"] == "config_warning"
    assert events[0]["field"] == "p"
    assert events[0]["seq"] == 1


def test_config_matrices_and_echo():
    cfg = RingConfig(n=4)
    assert cfg.L.shape == (4, 4) and cfg.L[0, 0] == 0 and cfg.L[0, 1] == 6.0
    assert cfg.to_dict()["L"] == 6.0
    one = cfg.with_n(1)
    assert one.to_dict()["L"] == 6.0 and one.to_dict()["p"] == 5.11
    L = np.full((2, 2), 7.0)
    custom = RingConfig(n=2, L=L, sigma=[4.0, 5.0])
    assert not custom.is_uniform()
    assert custom.to_dict()["sigma"] == [4.0, 5.0]


def test_polar_cartesian_examples():
    v = polar_from_cartesian(40.0, 0.0, math.pi / 2, 6.0)
    assert (v.r, v.phi, v.s, v.v) == pytest.approx((40.0, 0.0, 0.0, 6.0))
    x, y, theta, _ = cartesian_from_polar(VehicleState(r=30, phi=math.pi / 2, s=0, v=5))
    assert x == pytest.approx(0.0, abs=1e-12)
    assert y == pytest.approx(30.0)
    assert theta == pytest.approx(math.pi)
    with pytest.raises(StateSpaceError):
        polar_from_cartesian(0.0, 0.0, 0.0, 1.0)


def test_polar_cartesian_round_trip_keeps_unwrapped_phi():
    rng = np.random.default_rng(11)
    for _ in range(50):
        st = VehicleState(rng.uniform(21, 59), rng.uniform(-20, 20), rng.uniform(-0.16, 0.16), rng.uniform(1, 9))
        back = polar_from_cartesian(*cartesian_from_polar(st), phi_ref=st.phi)
        assert back.r == pytest.approx(st.r, abs=1e-12)
        assert back.phi == pytest.approx(st.phi, abs=1e-12)
        assert back.s == pytest.approx(st.s, abs=1e-12)
        assert back.v == st.v


def test_fleet_state_vector_layout_and_immutability():
    w = FleetState(r=[30, 40], phi=[0.1, 0.2], s=[0.0, 0.01], v=[4, 5])
    vec = w.as_vector()
    assert list(vec) == [30, 40, 0.1, 0.2, 0.0, 0.01, 4, 5]
    assert FleetState.from_vector(vec).v.tolist() == [4, 5]
    with pytest.raises(ValueError):
        w.r[0] = 1.0
    assert w.with_value("v", 1, 6.0).v.tolist() == [4, 6]
    assert w.v.tolist() == [4, 5]


def test_off_diagonal_mask_is_shared_and_read_only():
    mask = off_diagonal(4)
    assert mask is off_diagonal(4)
    assert mask.sum() == 12 and not mask.diagonal().any()
    with pytest.raises(ValueError):
        mask[0, 1] = False

"""
Closed-loop run with runtime monitors.

run_scenario() steps the fleet with RK4 and, after every step, checks
  - Omega membership (strict, no clamping)
  - CLF monotonicity within clf_tol * max(1, H)
and every `dissipation_every` steps compares the finite-difference rate of
the CLF with the exact closed-loop rate and the dissipation bound. The first
failed monitor ends the run; the result carries the record up to that point.
A run whose unresolved dissipation checks exceed max_unresolved_share fails
at the end.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
import math

import numpy as np

from Module_1_Ring_Model.ring_geometry import FleetState, StateSpaceError, check_state_space, off_diagonal
from Module_1_Ring_Model.dynamics import IntegrationError, polar_rhs_vector, rk4_step, step_polar
from Module_1_Ring_Model import events as geometry_events
from Module_2_Cruise_Controllers.controllers import CruiseController, FleetTerms
from Module_2_Cruise_Controllers.clf import ResolutionError, clf_from_terms, dissipation_residual
from .scenario import Scenario
from .sampler import sample_initial_fleet
from .metrics import MetricsSeries, equilibrium_residual, metrics_series
from . import events as ev


class MonitorViolation(RuntimeError):
    """First violated runtime invariant, with the time and the offending state."""

    def __init__(self, monitor: str, t: float, state: FleetState, detail: str):
        self.monitor = monitor
        self.t = t
        self.state = state
        self.detail = detail
        super().__init__(f"{monitor} violated at t={t:.6g}: {detail}")


@dataclass(eq=False)
class TrajectoryRecord:
    """Decimated trajectory: one row every record_every steps, step 0 included."""
    t: np.ndarray
    states: np.ndarray            # (K, 4n), w ordering
    F: np.ndarray                 # (K, n)
    delta: np.ndarray             # (K, n)
    clf: np.ndarray               # (K,)
    frame: str = "inertial"
    checks: List[Dict[str, Any]] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.t.size)

    def state(self, k: int) -> FleetState:
        return FleetState.from_vector(self.states[k])


@dataclass(eq=False)
class RunResult:
    scenario: Scenario
    record: TrajectoryRecord
    metrics: MetricsSeries
    violation: Optional[MonitorViolation]
    margins: Dict[str, float]
    H0: float
    max_control: float            # max over the run of |F_i| + |delta_i|
    steps_taken: int

    @property
    def passed(self) -> bool:
        return self.violation is None

    @property
    def unresolved_checks(self) -> int:
        return sum(1 for c in self.record.checks if not c["resolved"])

    def convergence(self) -> Dict[str, Any]:
        """Errors at t_end and t_end/2 against the scenario's convergence tolerance."""
        tol = self.scenario.monitors.convergence_tol
        t_end = float(self.record.t[-1])
        end, mid = self.metrics.at(t_end), self.metrics.at(0.5 * t_end)
        out: Dict[str, Any] = {"tolerance": tol, "t_end": t_end}
        ok = True
        for key in ("sup_angular_error", "sup_accel", "sup_orientation"):
            below = end[key] < tol
            decayed = end[key] < mid[key]
            out[key] = {"end": end[key], "half": mid[key], "below_tol": below, "decayed": decayed}
            ok = ok and below and decayed
        out["converged"] = ok
        return out

    def summary(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario.name,
            "passed": self.passed,
            "violation": None if self.violation is None else {
                "monitor": self.violation.monitor, "t": self.violation.t, "detail": self.violation.detail,
                "state": {k: getattr(self.violation.state, k).tolist() for k in ("r", "phi", "s", "v")},
            },
            "steps": self.steps_taken,
            "H0": self.H0,
            "max_control": self.max_control,
            "margins": dict(self.margins),
            "metrics": self.metrics.summary(),
            "convergence": self.convergence(),
            "dissipation_checks": len(self.record.checks),
            "unresolved_checks": self.unresolved_checks,
        }


def build_controller(sc: Scenario) -> CruiseController:
    return CruiseController(sc.ring, sc.effective_potentials(), sc.controller.family)


def _update_margins(margins: Dict[str, float], w: FleetState, terms: FleetTerms, sc: Scenario) -> None:
    cfg = sc.ring
    current = {
        "r_inner": float(np.min(w.r - cfg.R_in)),
        "r_outer": float(np.min(cfg.R_out - w.r)),
        "v_positive": float(np.min(w.v)),
        "v_limit": float(np.min(cfg.v_max - w.v)),
        "orientation": float(np.min(cfg.Theta - np.abs(w.s))),
    }
    if w.n > 1:
        off = off_diagonal(w.n)
        current["gap"] = float(np.min((terms.d - cfg.L)[off]))
    for k, val in current.items():
        margins[k] = min(margins.get(k, math.inf), val)


def _step(w: FleetState, terms: FleetTerms, controller: CruiseController, sc: Scenario) -> FleetState:
    cfg, integ = sc.ring, sc.integrator
    if not integ.stage_controls:
        return step_polar(w, terms, cfg, integ.dt, integ.frame)
    shift = cfg.omega_star if integ.frame == "rotating" else 0.0

    def rhs(x, _):
        u = controller.control(FleetState.from_vector(x))
        return polar_rhs_vector(x, u.F, u.delta, cfg.sigma, shift)

    return FleetState.from_vector(rk4_step(rhs, w.as_vector(), None, integ.dt))


def _outside(w: FleetState, t: float, sc: Scenario, cause: Exception) -> MonitorViolation:
    report = check_state_space(w, sc.ring)
    if report.member:
        return MonitorViolation("controller_domain", t, w, str(cause))
    first = report.violations[0]
    geometry_events.emit_membership_violation(t, first.constraint, list(first.vehicles), first.margin)
    return MonitorViolation("omega_membership", t, w,
                            f"{first.constraint} for vehicles {first.vehicles} (margin {first.margin:.3g})")


def run_scenario(sc: Scenario, controller: Optional[CruiseController] = None,
                 initial: Optional[FleetState] = None) -> RunResult:
    """
    Validate, sample (or take `initial`), step to t_end and compute metrics.
    `controller` overrides the scenario's controller; the negative control
    of the dissipation oracle is injected this way.
    """
    sc.validate()
    controller = controller or build_controller(sc)
    cfg, pcfg = sc.ring, controller.pcfg
    integ, mon = sc.integrator, sc.monitors
    w = initial if initial is not None else sample_initial_fleet(sc.init, cfg)
    report = check_state_space(w, cfg)
    if not report.member:
        raise StateSpaceError(f"initial state outside Omega: {report.violations[0]}")

    steps = integ.steps
    terms = controller.evaluate(w)
    H = clf_from_terms(controller.kind, w, terms, cfg, pcfg).total
    H0 = H
    ev.emit_run_start(sc.name, controller.label, w.n, steps, H0)

    ts: List[float] = []
    states: List[np.ndarray] = []
    Fs: List[np.ndarray] = []
    deltas: List[np.ndarray] = []
    clfs: List[float] = []
    checks: List[Dict[str, Any]] = []

    def record(t: float, x: FleetState, tm: FleetTerms, h: float) -> None:
        ts.append(t)
        states.append(x.as_vector())
        Fs.append(np.array(tm.F))
        deltas.append(np.array(tm.delta))
        clfs.append(h)

    def spot_check(t: float, x: FleetState) -> None:
        try:
            res = dissipation_residual(x, controller, cfg, pcfg, h=mon.fd_step, t=t, emit=True)
        except ResolutionError as exc:
            checks.append({"t": t, "resolved": False, "detail": str(exc)})
            ev.emit_dissipation_unresolved(t, str(exc))
            return
        ok = res.holds(mon.dissipation_tol)
        checks.append({"t": t, "resolved": True, "passed": ok, "dH_dt": res.dH_dt_fd,
                       "bound": res.analytic_bound, "exact_rate": res.exact_rate})
        if not ok:
            raise MonitorViolation("dissipation", t, x,
                                   f"dH/dt={res.dH_dt_fd:.6g}, bound={res.analytic_bound:.6g}, "
                                   f"exact={res.exact_rate:.6g}")

    margins: Dict[str, float] = {}
    _update_margins(margins, w, terms, sc)
    max_control = float(np.max(np.abs(terms.F) + np.abs(terms.delta)))
    record(0.0, w, terms, H)
    checkpoint = max(1, steps // 10)
    violation: Optional[MonitorViolation] = None
    k = 0
    try:
        spot_check(0.0, w)
        for k in range(1, steps + 1):
            t = k * integ.dt
            try:
                w_next = _step(w, terms, controller, sc)
            except IntegrationError as exc:
                raise MonitorViolation("integration", t, w, str(exc)) from exc
            try:
                terms_next = controller.evaluate(w_next)
            except StateSpaceError as exc:
                raise _outside(w_next, t, sc, exc) from exc
            H_next = clf_from_terms(controller.kind, w_next, terms_next, cfg, pcfg).total
            tol = mon.clf_tol * max(1.0, H)
            if H_next > H + tol:
                ev.emit_clf_increase(t, H, H_next, tol)
                raise MonitorViolation("clf_monotonicity", t, w_next,
                                       f"H rose from {H:.12g} to {H_next:.12g} (tolerance {tol:.3g})")
            w, terms, H = w_next, terms_next, H_next
            _update_margins(margins, w, terms, sc)
            max_control = max(max_control, float(np.max(np.abs(terms.F) + np.abs(terms.delta))))
            if k % mon.dissipation_every == 0:
                spot_check(t, w)
            if k % integ.record_every == 0:
                record(t, w, terms, H)
            if k % checkpoint == 0:
                gap = float(np.min(terms.d[off_diagonal(w.n)])) if w.n > 1 else math.inf
                ev.emit_run_checkpoint(t, H, equilibrium_residual(w, cfg, pcfg, controller.family), gap)
    except MonitorViolation as exc:
        violation = exc
        ev.emit_monitor_violation(exc.t, exc.monitor, exc.detail)
    steps_taken = k if violation is None else max(k - 1, 0)
    unresolved = sum(1 for c in checks if not c["resolved"])
    if violation is None and unresolved > mon.max_unresolved_share * len(checks):
        violation = MonitorViolation(
            "dissipation_resolution", k * integ.dt, w,
            f"{unresolved} of {len(checks)} dissipation checks unresolved (limit {mon.max_unresolved_share:g})")
        ev.emit_monitor_violation(violation.t, violation.monitor, violation.detail)

    rec = TrajectoryRecord(t=np.asarray(ts), states=np.vstack(states), F=np.vstack(Fs),
                           delta=np.vstack(deltas), clf=np.asarray(clfs), frame=integ.frame,
                           checks=checks)
    metrics = metrics_series(rec.t, rec.states, rec.F, rec.delta, rec.clf, cfg, pcfg, controller.family)
    ev.emit_run_complete(sc.name, violation is None, float(rec.t[-1]), steps_taken,
                         None if violation is None else violation.monitor)
    return RunResult(scenario=sc, record=rec, metrics=metrics, violation=violation, margins=margins,
                     H0=H0, max_control=max_control, steps_taken=steps_taken)

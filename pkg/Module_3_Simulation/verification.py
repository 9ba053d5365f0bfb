"""
The `verify` harness: every check that needs no long simulation.

- potential-family axioms and analytic derivatives against finite differences
- radial gradients of the CLF against the controller's Lambda / Z terms
- dissipation oracle on seeded states, plus the sign-flipped negative control
- permitted-information audit
- polar vs Cartesian cross-model oracle
- dt-halving consistency of the held-control integrator
"""

from dataclasses import dataclass, field
from typing import Callable, List
import math

import numpy as np

from Module_1_Ring_Model.ring_geometry import (
    FleetState, cartesian_from_polar, polar_from_cartesian,
)
from Module_1_Ring_Model.potentials import (
    check_axioms, vehicle_potential, boundary_potential, viscosity_kernel,
)
from Module_1_Ring_Model.dynamics import step_cartesian, step_polar
from Module_2_Cruise_Controllers.controllers import CruiseController, permitted_information_audit
from Module_2_Cruise_Controllers.clf import ResolutionError, dissipation_residual, radial_gradient_fd
from .scenario import Scenario, InitSpec
from .sampler import sample_initial_fleet
from .runner import build_controller


@dataclass
class CheckItem:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    scenario: str
    items: List[CheckItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.items.append(CheckItem(name, bool(passed), detail))

    def failed(self) -> List[str]:
        return [i.name for i in self.items if not i.passed]


def _fd(fn: Callable, x: float, h: float) -> float:
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def derivative_errors(sc: Scenario, points: int = 50, seed: int = 7) -> float:
    """Largest relative error of V', V'', U', kappa' against central differences."""
    cfg, p = sc.ring, sc.effective_potentials()
    L, lam = cfg._uniform_value(cfg.L, "L"), cfg.lam
    rng = np.random.default_rng(seed)
    worst = 0.0

    def rel(a: float, b: float) -> float:
        return abs(a - b) / max(1.0, abs(b))

    for d in rng.uniform(L + 0.5, lam - 0.5, size=points):
        _, dV, d2V = vehicle_potential(d, L, lam, p.q1)
        worst = max(worst, rel(_fd(lambda x: vehicle_potential(x, L, lam, p.q1)[0], d, 1e-5), dV))
        worst = max(worst, rel(_fd(lambda x: vehicle_potential(x, L, lam, p.q1)[1], d, 1e-5), d2V))
        if p.q2 > 0:
            _, dk = viscosity_kernel(d, L, lam, p.q2)
            worst = max(worst, rel(_fd(lambda x: viscosity_kernel(x, L, lam, p.q2)[0], d, 1e-5), dk))
    lo, hi = cfg.R_in + 1.0, cfg.R_out - 1.0
    for r in rng.uniform(lo, hi, size=points):
        _, dU = boundary_potential(r, cfg.R_in, cfg.R_out, p.c)
        worst = max(worst, rel(_fd(lambda x: boundary_potential(x, cfg.R_in, cfg.R_out, p.c)[0], r, 1e-6), dU))
    return worst


def sampled_states(sc: Scenario, count: int, seed: int) -> List[FleetState]:
    """Seeded Omega-interior fleets with the scenario's geometry."""
    out = []
    for k in range(count):
        spec = InitSpec(seed=seed + k, margin_r=sc.init.margin_r, margin_s=sc.init.margin_s,
                        margin_v=sc.init.margin_v, margin_d=sc.init.margin_d,
                        max_attempts=sc.init.max_attempts)
        out.append(sample_initial_fleet(spec, sc.ring))
    return out


def cross_model_error(controller: CruiseController, w: FleetState, horizon: float = 10.0,
                      dt: float = 1e-3) -> float:
    """
    Integrates the polar and the Cartesian models side by side with the same
    per-step controls; returns the largest state-wise difference after
    mapping the Cartesian trajectory back to polar coordinates.
    """
    cfg = controller.cfg
    cart = np.array([cartesian_from_polar(x) for x in w.vehicles(cfg)]).T
    worst = 0.0
    for _ in range(int(round(horizon / dt))):
        u = controller.control(w)
        w = step_polar(w, u, cfg, dt)
        cart = step_cartesian(cart, u, cfg.sigma, dt)
        for i in range(w.n):
            back = polar_from_cartesian(cart[0, i], cart[1, i], cart[2, i], cart[3, i],
                                        phi_ref=float(w.phi[i]))
            s_ref = float(w.s[i])
            ds = math.remainder(back.s - s_ref, 2 * math.pi)
            worst = max(worst, abs(back.r - w.r[i]), abs(back.phi - w.phi[i]), abs(ds),
                        abs(back.v - w.v[i]))
    return worst


def dt_halving_errors(controller: CruiseController, w: FleetState, horizon: float, dt: float) -> List[float]:
    """Final-state differences between dt and dt/2, and between dt/2 and dt/4."""
    finals = []
    for k in range(3):
        h = dt / 2 ** k
        x = w
        for _ in range(int(round(horizon / h))):
            x = step_polar(x, controller.control(x), controller.cfg, h)
        finals.append(x.as_vector())
    return [float(np.max(np.abs(finals[0] - finals[1]))), float(np.max(np.abs(finals[1] - finals[2])))]


def verify_scenario(sc: Scenario, samples: int = 10, seed: int = 1000,
                    oracle_horizon: float = 10.0) -> VerificationReport:
    sc.validate()
    report = VerificationReport(scenario=sc.name)
    controller = build_controller(sc)
    cfg, pcfg = sc.ring, controller.pcfg

    axioms = check_axioms(controller.family, cfg)
    report.add("potential_axioms", axioms.passed, ", ".join(axioms.failed_axioms()))

    worst = derivative_errors(sc)
    report.add("analytic_derivatives", worst < 1e-5, f"max relative error {worst:.3g}")

    states = sampled_states(sc, samples, seed)
    grad_err = 0.0
    for w in states[:3]:
        terms = controller.evaluate(w)
        for i in range(w.n):
            fd = radial_gradient_fd(controller.kind, w, i, cfg, pcfg, controller.family)
            grad_err = max(grad_err, abs(fd + terms.radial[i]) / max(1.0, abs(fd)))
    report.add("radial_gradient", grad_err < 1e-5, f"max relative error {grad_err:.3g}")

    held, broken, unresolved = 0, 0, 0
    negative = controller.negative_control()
    for w in states:
        try:
            if dissipation_residual(w, controller).holds():
                held += 1
            if not dissipation_residual(w, negative).holds():
                broken += 1
        except ResolutionError:
            unresolved += 1
    report.add("dissipation_oracle", held == len(states),
               f"{held}/{len(states)} states certified, {unresolved} unresolved")
    report.add("negative_control", broken == len(states),
               f"sign-flipped controller rejected on {broken}/{len(states)} states")

    audit = permitted_information_audit(controller, 0, states[0])
    report.add("information_audit", audit.permitted, "; ".join(audit.violations))

    err = cross_model_error(controller, states[0], horizon=oracle_horizon)
    report.add("cross_model_oracle", err <= 1e-6, f"max polar/cartesian difference {err:.3g}")

    e1, e2 = dt_halving_errors(controller, states[0], horizon=0.5, dt=sc.integrator.dt)
    report.add("dt_halving", e2 < e1, f"|x(dt)-x(dt/2)|={e1:.3g}, |x(dt/2)-x(dt/4)|={e2:.3g}")
    return report

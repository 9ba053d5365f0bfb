"""
Control Lyapunov functions and their numerical dissipation certificate.

- newtonian_energy: H(w), kinetic + boundary + pairwise + orientation penalty
- relativistic_energy: H_R(w), kinetic term divided by (v_max - v) v
- dissipation_residual: central difference of H along the closed-loop flow,
  compared with the exact closed-loop rate and with the dissipation bound
"""

from dataclasses import dataclass
from typing import Optional
import math

import numpy as np

from Module_1_Ring_Model.ring_geometry import RingConfig, FleetState, StateSpaceError, off_diagonal, pair_geometry
from Module_1_Ring_Model.potentials import PotentialConfig, PotentialFamily, default_family
from Module_1_Ring_Model.dynamics import polar_rhs_vector, rk4_step
from .controllers import CruiseController, FleetTerms
from . import events as ev


class ResolutionError(ArithmeticError):
    """Finite differences at h and 2h disagree; the step does not resolve the rate."""


@dataclass(frozen=True)
class ClfValue:
    total: float
    kinetic_rotational: float
    potential_boundary: float
    potential_pairwise: float
    orientation_penalty: float


def _in_omega(w: FleetState, cfg: RingConfig, d: np.ndarray) -> bool:
    if w.n != cfg.n:
        return False
    inside = bool(np.all(w.r > cfg.R_in) and np.all(w.r < cfg.R_out) and np.all(w.v > 0)
                  and np.all(w.v < cfg.v_max) and np.all(np.abs(w.s) < cfg.Theta))
    if inside and w.n > 1:
        off = off_diagonal(w.n)
        inside = bool(np.all(d[off] > cfg.L[off]))
    return inside


def _energy(w: FleetState, cfg: RingConfig, pcfg: PotentialConfig,
            family: Optional[PotentialFamily], relativistic: bool) -> ClfValue:
    family = family or default_family(cfg, pcfg)
    d = pair_geometry(w, cfg)[0]
    if not _in_omega(w, cfg, d):
        raise StateSpaceError("CLF evaluated outside Omega")
    U, _ = family.boundary_arrays(w.r)
    V, _, _ = family.pair_arrays(d)
    return _assemble(w, cfg, pcfg, np.asarray(U, dtype=float), V, relativistic)


def _assemble(w: FleetState, cfg: RingConfig, pcfg: PotentialConfig, U: np.ndarray,
              V: np.ndarray, relativistic: bool) -> ClfValue:
    c, sn = np.cos(w.s), np.sin(w.s)
    e = w.v * c / w.r - cfg.omega_star
    if relativistic:
        kinetic = 0.5 * np.sum((e ** 2 + pcfg.b * w.v ** 2 * sn ** 2) / ((cfg.v_max - w.v) * w.v))
    else:
        kinetic = 0.5 * np.sum(e ** 2) + 0.5 * pcfg.b * np.sum(w.v ** 2 * sn ** 2)
    cT = math.cos(cfg.Theta)
    penalty = pcfg.A * np.sum(1.0 / (c - cT) - 1.0 / (1.0 - cT))
    boundary = float(np.sum(U))
    pairwise = 0.5 * float(np.sum(V))
    kinetic, penalty = float(kinetic), float(max(penalty, 0.0))
    return ClfValue(total=kinetic + boundary + pairwise + penalty, kinetic_rotational=kinetic,
                    potential_boundary=boundary, potential_pairwise=pairwise,
                    orientation_penalty=penalty)


def newtonian_energy(w: FleetState, cfg: RingConfig, pcfg: PotentialConfig,
                     family: Optional[PotentialFamily] = None) -> ClfValue:
    return _energy(w, cfg, pcfg, family, relativistic=False)


def relativistic_energy(w: FleetState, cfg: RingConfig, pcfg: PotentialConfig,
                        family: Optional[PotentialFamily] = None) -> ClfValue:
    return _energy(w, cfg, pcfg, family, relativistic=True)


def clf_value(kind: str, w: FleetState, cfg: RingConfig, pcfg: PotentialConfig,
              family: Optional[PotentialFamily] = None) -> ClfValue:
    """H for the Newtonian controller, H_R for the relativistic one."""
    return _energy(w, cfg, pcfg, family, relativistic=(kind == "prcc"))


def clf_from_terms(kind: str, w: FleetState, terms: FleetTerms, cfg: RingConfig,
                   pcfg: PotentialConfig) -> ClfValue:
    """CLF value reusing the potentials already evaluated by CruiseController.evaluate."""
    return _assemble(w, cfg, pcfg, terms.U, terms.V, relativistic=(kind == "prcc"))


def viscous_dissipation(t: FleetTerms, w: FleetState, family: PotentialFamily) -> float:
    """1/2 sum_i sum_j kappa_ij [(ds)(dg2) + (domega)(dg1)], non-negative for monotone g."""
    if not np.any(t.kappa):
        return 0.0
    sh = family.shaping
    sn = np.sin(w.s)
    g1 = np.asarray(sh.g1(t.omega), dtype=float)
    g2 = np.asarray(sh.g2(sn), dtype=float)
    lat = (sn[None, :] - sn[:, None]) * (g2[None, :] - g2[:, None])
    lon = (t.omega[None, :] - t.omega[:, None]) * (g1[None, :] - g1[:, None])
    return 0.5 * float(np.sum(t.kappa * (lat + lon)))


def exact_rate(t: FleetTerms, w: FleetState, controller: CruiseController) -> float:
    """The closed-loop derivative of the CLF implied by the control laws."""
    sn = np.sin(w.s)
    visc = viscous_dissipation(t, w, controller.family)
    if controller.kind == "ncc":
        return float(-controller.pcfg.mu2 * np.sum(sn ** 2) - np.sum(t.k * t.e ** 2)) - visc
    sh = controller.family.shaping
    return float(-np.sum(sn * np.asarray(sh.f2(sn), dtype=float))
                 - np.sum(t.e * np.asarray(sh.f1(t.e), dtype=float))) - visc


def dissipation_bound(t: FleetTerms, w: FleetState, controller: CruiseController) -> float:
    """-mu2 sum sin^2 s - mu1 sum e^2 (NCC); -sum e f1(e) - sum sin s f2(sin s) (PRCC)."""
    sn = np.sin(w.s)
    if controller.kind == "ncc":
        p = controller.pcfg
        return float(-p.mu2 * np.sum(sn ** 2) - p.mu1 * np.sum(t.e ** 2))
    sh = controller.family.shaping
    return float(-np.sum(sn * np.asarray(sh.f2(sn), dtype=float))
                 - np.sum(t.e * np.asarray(sh.f1(t.e), dtype=float)))


@dataclass(frozen=True)
class DissipationResult:
    dH_dt_fd: float
    analytic_bound: float
    exact_rate: float
    margin: float
    identity_error: float
    H: float
    # floating-point noise of the difference quotient, about eps * H / h
    noise: float = 0.0

    def scale(self) -> float:
        return max(1.0, abs(self.exact_rate))

    def holds(self, tol: float = 1e-6) -> bool:
        """Bound respected and exact identity reproduced, within tol relative plus noise."""
        return self.margin >= -(tol * max(1.0, abs(self.analytic_bound)) + self.noise) and \
            self.identity_error <= tol * self.scale() + self.noise


def _flow(w: FleetState, controller: CruiseController, F, delta, h: float, sign: float) -> FleetState:
    cfg = controller.cfg

    def rhs(x, _):
        return sign * polar_rhs_vector(x, F, delta, cfg.sigma)

    return FleetState.from_vector(rk4_step(rhs, w.as_vector(), None, h))


def dissipation_residual(w: FleetState, controller: CruiseController, cfg: Optional[RingConfig] = None,
                         pcfg: Optional[PotentialConfig] = None, h: float = 1e-6,
                         t: Optional[float] = None, emit: bool = False) -> DissipationResult:
    """
    dH/dt along the closed loop by central differences of two RK4 micro-steps
    (+h and -h, inputs held), checked against a second difference at 2h.
    """
    cfg = cfg or controller.cfg
    pcfg = pcfg or controller.pcfg
    terms = controller.evaluate(w)
    F, delta = terms.F, terms.delta

    def H(x: FleetState) -> float:
        return clf_value(controller.kind, x, cfg, pcfg, controller.family).total

    H0 = H(w)

    def central(step: float) -> float:
        fwd = H(_flow(w, controller, F, delta, step, 1.0))
        bwd = H(_flow(w, controller, F, delta, step, -1.0))
        return (fwd - bwd) / (2.0 * step)

    fd = central(h)
    fd2 = central(2.0 * h)
    noise = 64.0 * np.finfo(float).eps * max(1.0, abs(H0)) / h
    resolution = 1e-7 * max(1.0, abs(fd)) + noise
    if abs(fd - fd2) > resolution:
        raise ResolutionError(
            f"dH/dt estimates disagree: {fd:.10g} (h={h:g}) vs {fd2:.10g} (h={2 * h:g})")
    bound = dissipation_bound(terms, w, controller)
    rate = exact_rate(terms, w, controller)
    result = DissipationResult(dH_dt_fd=fd, analytic_bound=bound, exact_rate=rate,
                               margin=bound - fd, identity_error=abs(fd - rate), H=H0, noise=noise)
    if emit:
        ev.emit_dissipation_check(t, controller.label, fd, bound, result.margin, result.identity_error)
    return result


def radial_gradient_fd(kind: str, w: FleetState, i: int, cfg: RingConfig, pcfg: PotentialConfig,
                       family: Optional[PotentialFamily] = None, h: float = 1e-6) -> float:
    """dH/dr_i by central differences; equals -Lambda_i (NCC) or -Z_i (PRCC)."""
    plus = w.with_value("r", i, float(w.r[i]) + h)
    minus = w.with_value("r", i, float(w.r[i]) - h)
    return (clf_value(kind, plus, cfg, pcfg, family).total
            - clf_value(kind, minus, cfg, pcfg, family).total) / (2.0 * h)

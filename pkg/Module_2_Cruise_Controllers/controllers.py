"""
Decentralized cruise controllers for the lane-free ring-road.

- CruiseController(kind="ncc"|"prcc") maps a fleet snapshot to per-vehicle
  acceleration F and steering angle delta
- NCC: Newtonian energy, state-dependent gain k_i(w) keeps speeds in (0, v_max)
- PRCC: pseudo-relativistic energy, speed confinement comes from the energy itself
- viscous variants (q2 > 0) couple neighbour speeds and orientations through kappa
- permitted_information_audit(...) probes which foreign fields a control reads
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set
import math

import numpy as np

from Module_1_Ring_Model.ring_geometry import (
    RingConfig, FleetState, StateSpaceError, off_diagonal, pair_geometry,
)
from Module_1_Ring_Model.potentials import PotentialConfig, PotentialFamily, default_family
from . import events as ev

KINDS = ("ncc", "prcc")
FIELDS = ("r", "phi", "s", "v")


@dataclass(frozen=True)
class ControlInput:
    F: float
    delta: float


@dataclass(frozen=True, eq=False)
class FleetControl:
    """Controls of the whole fleet, one array per input."""
    F: np.ndarray
    delta: np.ndarray

    def __getitem__(self, i: int) -> ControlInput:
        return ControlInput(float(self.F[i]), float(self.delta[i]))

    def __len__(self) -> int:
        return int(self.F.size)

    def inputs(self) -> List[ControlInput]:
        return [self[i] for i in range(len(self))]


@dataclass(frozen=True)
class NccTerms:
    a_i: float
    Lambda_i: float
    Phi_i: float
    G_i: float
    M_i: float
    k_i: float


@dataclass(frozen=True)
class PrccTerms:
    q_i: float
    gamma_i: float
    zeta_weight_i: float
    Z_i: float
    Phi_i: float
    G_i: float
    M_i: float


@dataclass(eq=False)
class FleetTerms:
    """Every intermediate quantity of one control evaluation, as arrays."""
    kind: str
    d: np.ndarray
    kappa: np.ndarray
    neighbors: np.ndarray
    omega: np.ndarray
    e: np.ndarray
    W: np.ndarray
    dU: np.ndarray
    Phi: np.ndarray
    G: np.ndarray
    M: np.ndarray
    radial: np.ndarray            # Lambda (ncc) or Z (prcc)
    weight: np.ndarray            # a (ncc) or gamma (prcc)
    k: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None
    zeta: Optional[np.ndarray] = None
    F: np.ndarray = field(default_factory=lambda: np.zeros(0))
    delta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    V: Optional[np.ndarray] = None
    U: Optional[np.ndarray] = None


class CruiseController:
    """
    kind: "ncc" | "prcc". Viscosity follows the family (q2 > 0 means viscous).
    radial_sign = -1 flips Lambda / Z; it exists only as a negative control
    for the dissipation oracle.
    """

    def __init__(self, cfg: RingConfig, pcfg: PotentialConfig, kind: str = "ncc",
                 family: Optional[PotentialFamily] = None, radial_sign: float = 1.0):
        kind = kind.lower()
        if kind not in KINDS:
            raise ValueError(f"unknown controller family {kind!r}; expected one of {KINDS}")
        self.cfg = cfg
        self.pcfg = pcfg
        self.kind = kind
        self.family = family or default_family(cfg, pcfg)
        self.radial_sign = radial_sign

    @property
    def viscous(self) -> bool:
        return self.pcfg.q2 > 0

    @property
    def label(self) -> str:
        return f"{self.kind}_{'viscous' if self.viscous else 'inviscid'}"

    def negative_control(self) -> "CruiseController":
        return CruiseController(self.cfg, self.pcfg, self.kind, self.family, radial_sign=-self.radial_sign)

    def _shared(self, w: FleetState) -> FleetTerms:
        cfg, sh = self.cfg, self.family.shaping
        _require_interior(w, cfg)
        d, dr, dphi = pair_geometry(w, cfg)
        V, dV, K = self.family.pair_arrays(d)
        neighbors = off_diagonal(w.n) & (d <= cfg.lam)
        inv_d = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
        rj = w.r[None, :]
        W = np.sum((cfg.p * dr + rj * 2.0 * np.sin(0.5 * dphi) ** 2) * dV * inv_d, axis=1)
        Phi = w.r / cfg.omega_star * np.sum(dV * rj * np.sin(dphi) * inv_d, axis=1)
        omega = w.v * np.cos(w.s) / w.r
        e = omega - cfg.omega_star
        if np.any(K):
            g1 = np.asarray(sh.g1(omega), dtype=float)
            g2 = np.asarray(sh.g2(np.sin(w.s)), dtype=float)
            G = np.sum(K * (g1[None, :] - g1[:, None]), axis=1) / cfg.omega_star
            M = np.sum(K * (g2[None, :] - g2[:, None]), axis=1)
        else:
            G = np.zeros(w.n)
            M = np.zeros(w.n)
        U, dU = self.family.boundary_arrays(w.r)
        zeros = np.zeros(w.n)
        return FleetTerms(kind=self.kind, d=d, kappa=K, neighbors=neighbors, omega=omega, e=e,
                          W=W, dU=np.asarray(dU, dtype=float), Phi=Phi, G=G, M=M,
                          radial=zeros, weight=zeros, V=V, U=np.asarray(U, dtype=float))

    def evaluate(self, w: FleetState) -> FleetTerms:
        """Controls and every intermediate term for the snapshot w."""
        t = self._shared(w)
        if self.kind == "ncc":
            self._ncc(w, t)
        else:
            self._prcc(w, t)
        return t

    def control(self, w: FleetState) -> FleetControl:
        t = self.evaluate(w)
        return FleetControl(F=t.F, delta=t.delta)

    def _ncc(self, w: FleetState, t: FleetTerms) -> None:
        cfg, p = self.cfg, self.pcfg
        r, s, v = w.r, w.s, w.v
        c, sn = np.cos(s), np.sin(s)
        cT = math.cos(cfg.Theta)
        a = (p.b - 1.0 / r ** 2) * v ** 2 * c + cfg.omega_star * v / r + p.A / (c - cT) ** 2
        Lam = self.radial_sign * (t.e * v * c / r ** 2 - t.dU - t.W)
        PG = t.Phi - t.G
        f = self.family.shaping.f
        k = p.mu1 + PG + np.asarray(f(-(cfg.v_max * c / (cfg.v_max * c - r * cfg.omega_star)) * PG), dtype=float)
        _require_positive(a, "a(r, s, v)")
        if np.any(k < p.mu1 * (1.0 - 1e-12)):
            raise StateSpaceError("state-dependent gain k_i fell below mu1")
        v_ref = r * cfg.omega_star / c
        F = -k * (v - v_ref) - v_ref * PG
        tan_delta = cfg.sigma * c / r - cfg.sigma / (v * a) * (p.mu2 * sn + (p.b * F * sn + Lam) * v - t.M)
        t.radial, t.weight, t.k = Lam, a, k
        t.F, t.delta = F, np.arctan(tan_delta)

    def _prcc(self, w: FleetState, t: FleetTerms) -> None:
        cfg, p = self.cfg, self.pcfg
        r, s, v = w.r, w.s, w.v
        c, sn = np.cos(s), np.sin(s)
        vm, om = cfg.v_max, cfg.omega_star
        gap = vm - v
        q = (vm * v * c - 2.0 * r * v * om + r * om * vm) / (2.0 * r * gap ** 2 * v ** 2)
        gamma = p.A / (c - math.cos(cfg.Theta)) ** 2 + v * c / gap * (p.b - 1.0 / r ** 2) + om / (r * gap)
        zeta = p.b * vm * sn / (2.0 * gap ** 2 * v)
        Z = self.radial_sign * (t.e * c / (gap * r ** 2) - t.dU - t.W)
        _require_positive(q, "q(r, s, v)")
        _require_positive(gamma, "gamma(r, s, v)")
        sh = self.family.shaping
        F = -(np.asarray(sh.f1(t.e), dtype=float) + om * (t.Phi - t.G)) / q
        tan_delta = cfg.sigma * c / r - cfg.sigma / (gamma * v) * (
            np.asarray(sh.f2(sn), dtype=float) + (zeta * F + Z) * v - t.M)
        t.radial, t.weight, t.q, t.zeta = Z, gamma, q, zeta
        t.F, t.delta = F, np.arctan(tan_delta)


def _require_interior(w: FleetState, cfg: RingConfig) -> None:
    if w.n != cfg.n:
        raise StateSpaceError(f"fleet has {w.n} vehicles, configuration expects {cfg.n}")
    if np.any(w.r <= cfg.R_in) or np.any(w.r >= cfg.R_out):
        raise StateSpaceError("radius outside (R_in, R_out)")
    if np.any(w.v <= 0) or np.any(w.v >= cfg.v_max):
        raise StateSpaceError("speed outside (0, v_max)")
    if np.any(np.abs(w.s) >= cfg.Theta):
        raise StateSpaceError("relative orientation outside (-Theta, Theta)")


def _require_positive(x: np.ndarray, name: str) -> None:
    if np.any(~(x > 0)):
        raise StateSpaceError(f"{name} is not positive; state is outside Omega")


def ncc_terms(i: int, w: FleetState, cfg: RingConfig, pcfg: PotentialConfig,
              controller: Optional[CruiseController] = None) -> NccTerms:
    t = (controller or CruiseController(cfg, pcfg, "ncc")).evaluate(w)
    return NccTerms(a_i=float(t.weight[i]), Lambda_i=float(t.radial[i]), Phi_i=float(t.Phi[i]),
                    G_i=float(t.G[i]), M_i=float(t.M[i]), k_i=float(t.k[i]))


def ncc_control(i: int, w: FleetState, cfg: RingConfig, pcfg: PotentialConfig) -> ControlInput:
    return CruiseController(cfg, pcfg, "ncc").control(w)[i]


def prcc_terms(i: int, w: FleetState, cfg: RingConfig, pcfg: PotentialConfig,
               controller: Optional[CruiseController] = None) -> PrccTerms:
    t = (controller or CruiseController(cfg, pcfg, "prcc")).evaluate(w)
    return PrccTerms(q_i=float(t.q[i]), gamma_i=float(t.weight[i]), zeta_weight_i=float(t.zeta[i]),
                     Z_i=float(t.radial[i]), Phi_i=float(t.Phi[i]), G_i=float(t.G[i]), M_i=float(t.M[i]))


def prcc_control(i: int, w: FleetState, cfg: RingConfig, pcfg: PotentialConfig) -> ControlInput:
    return CruiseController(cfg, pcfg, "prcc").control(w)[i]


def pairwise_action_residual(w: FleetState, controller: CruiseController) -> float:
    """sum_i sum_j V'_ij r_i r_j sin(phi_i - phi_j) / d_ij, zero for symmetric potentials."""
    d, _, dphi = pair_geometry(w, controller.cfg)
    _, dV, _ = controller.family.pair_arrays(d)
    inv_d = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    return float(np.sum(dV * np.outer(w.r, w.r) * np.sin(dphi) * inv_d))


@dataclass
class InformationReport:
    vehicle: int
    accessed: Dict[int, Set[str]] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)

    @property
    def permitted(self) -> bool:
        return not self.violations

    def neighbor_fields(self) -> Dict[int, Set[str]]:
        return {j: f for j, f in self.accessed.items() if j != self.vehicle and f}


def permitted_information_audit(controller: CruiseController, i: int, w: FleetState,
                                rel_step: float = 1e-6) -> InformationReport:
    """
    Perturb each field of each vehicle and record which perturbations change
    vehicle i's (F, delta). Own fields are always permitted; neighbours within
    lam may expose (r, phi), and (s, v) only to viscous controllers.
    """
    base = controller.control(w)[i]
    d = pair_geometry(w, controller.cfg)[0]
    report = InformationReport(vehicle=i)
    for j in range(w.n):
        seen: Set[str] = set()
        for name in FIELDS:
            x = float(getattr(w, name)[j])
            probe = w.with_value(name, j, x + rel_step * max(1.0, abs(x)))
            try:
                out = controller.control(probe)[i]
            except StateSpaceError:
                continue
            if out.F != base.F or out.delta != base.delta:
                seen.add(name)
        report.accessed[j] = seen
        if j == i or not seen:
            continue
        allowed = set()
        if d[i, j] <= controller.cfg.lam:
            allowed = {"r", "phi"} | ({"s", "v"} if controller.viscous else set())
        extra = seen - allowed
        if extra:
            report.violations.append(f"vehicle {i} reads {sorted(extra)} of vehicle {j} (d={d[i, j]:.3g})")
    ev.emit_information_audit(controller.label, i, report.permitted, len(report.violations))
    return report

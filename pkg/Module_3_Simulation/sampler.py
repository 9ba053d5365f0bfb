"""
Initial fleets: seeded rejection sampling inside Omega, and constructed
members of the equilibrium set used by the equilibrium tests.
"""

from typing import List, Optional
import math

import numpy as np

from Module_1_Ring_Model.ring_geometry import RingConfig, FleetState, check_state_space
from Module_1_Ring_Model.potentials import PotentialConfig, PotentialFamily, default_family
from .scenario import InitSpec


class SamplingError(RuntimeError):
    """The sampler could not place every vehicle within its attempt budget."""

    def __init__(self, message: str, placed: int, requested: int, capacity: float):
        self.placed = placed
        self.requested = requested
        self.capacity = capacity
        super().__init__(message)


def ring_capacity(cfg: RingConfig, spec: InitSpec) -> float:
    """Rough count of discs of diameter L + margin_d fitting in the sampled annulus."""
    inner, outer = cfg.R_in + spec.margin_r, cfg.R_out - spec.margin_r
    L = cfg._uniform_value(cfg.L, "L") if cfg.is_uniform() else float(np.max(cfg.L))
    diam = L + spec.margin_d
    if outer <= inner:
        return 0.0
    return (outer ** 2 - inner ** 2) / (0.25 * diam ** 2)


def sample_initial_fleet(spec: InitSpec, cfg: RingConfig) -> FleetState:
    """
    Draw vehicles one at a time with numpy's default_rng(seed); a candidate is
    kept when it is at weighted distance > L_ij + margin_d from every vehicle
    already placed. The same seed and config always give the same fleet.
    """
    explicit = spec.explicit_state()
    if explicit is not None:
        return explicit
    rng = np.random.default_rng(spec.seed)
    r_lo, r_hi = cfg.R_in + spec.margin_r, cfg.R_out - spec.margin_r
    s_hi = cfg.Theta - spec.margin_s
    v_lo, v_hi = spec.margin_v, cfg.v_max - spec.margin_v
    capacity = ring_capacity(cfg, spec)
    if r_hi <= r_lo or s_hi <= 0 or v_hi <= v_lo:
        raise SamplingError(
            f"sampling margins leave an empty box: r in ({r_lo:g}, {r_hi:g}), "
            f"|s| < {s_hi:g}, v in ({v_lo:g}, {v_hi:g})", 0, cfg.n, capacity)

    r: List[float] = []
    phi: List[float] = []
    attempts = 0
    while len(r) < cfg.n:
        if attempts >= spec.max_attempts:
            raise SamplingError(
                f"placed {len(r)} of {cfg.n} vehicles after {attempts} attempts; "
                f"the sampled annulus holds roughly {capacity:.0f} vehicles of gap "
                f"L + margin_d, reduce n or margin_d", len(r), cfg.n, capacity)
        attempts += 1
        rc = rng.uniform(r_lo, r_hi)
        pc = rng.uniform(0.0, 2.0 * math.pi)
        if r:
            k = len(r)
            rr, pp = np.asarray(r), np.asarray(phi)
            d = np.sqrt(cfg.p[k, :k] * (rc - rr) ** 2 + 4.0 * rc * rr * np.sin(0.5 * (pc - pp)) ** 2)
            if np.any(d <= cfg.L[k, :k] + spec.margin_d):
                continue
        r.append(rc)
        phi.append(pc)
    s = rng.uniform(-s_hi, s_hi, size=cfg.n)
    v = rng.uniform(v_lo, v_hi, size=cfg.n)
    fleet = FleetState(r=r, phi=phi, s=s, v=v)
    report = check_state_space(fleet, cfg)
    if not report.member:
        raise SamplingError(f"sampled fleet left Omega: {report.violations[0]}", cfg.n, cfg.n, capacity)
    return fleet


def _ring_residual(radius: float, n: int, cfg: RingConfig, family: PotentialFamily) -> float:
    """U'(r) + W_i for n vehicles evenly spaced on the circle of this radius."""
    fleet = equally_spaced(cfg, n, radius, 0.0)
    d = np.sqrt(np.maximum(2.0 * radius ** 2 * (1.0 - np.cos(fleet.phi[:, None] - fleet.phi[None, :])), 0.0))
    np.fill_diagonal(d, 0.0)
    _, dV, _ = family.pair_arrays(d)
    dphi = fleet.phi[:, None] - fleet.phi[None, :]
    inv_d = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    W = np.sum(radius * 2.0 * np.sin(0.5 * dphi) ** 2 * dV * inv_d, axis=1)
    _, dU = family.boundary_arrays(np.array([radius]))
    return float(dU[0] + W[0])


def equally_spaced(cfg: RingConfig, n: int, radius: float, phase: float = 0.0) -> FleetState:
    """n vehicles evenly spaced on one circle, aligned with the road at omega* r."""
    phi = phase + 2.0 * math.pi * np.arange(n) / n
    return FleetState(r=np.full(n, radius), phi=phi, s=np.zeros(n),
                      v=np.full(n, cfg.omega_star * radius))


def equilibrium_fleet(cfg: RingConfig, pcfg: PotentialConfig,
                      family: Optional[PotentialFamily] = None, tol: float = 1e-13) -> FleetState:
    """
    A member of the equilibrium set: cfg.n vehicles evenly spaced on one
    circle. Isolated vehicles sit on R_m; interacting ones are pushed
    outwards until the boundary gradient balances the pairwise push, found by
    bisection on (R_m + c, R_out).
    """
    family = family or default_family(cfg, pcfg)
    n = cfg.n
    chord = 2.0 * cfg.R_m * math.sin(math.pi / n) if n > 1 else math.inf
    if chord >= cfg.lam:
        return equally_spaced(cfg, n, cfg.R_m)
    lo, hi = cfg.R_m + pcfg.c, cfg.R_out - 1e-9
    if _ring_residual(lo, n, cfg, family) >= 0:
        return equally_spaced(cfg, n, lo)
    while hi - lo > tol * cfg.R_out:
        mid = 0.5 * (lo + hi)
        if _ring_residual(mid, n, cfg, family) < 0:
            lo = mid
        else:
            hi = mid
    return equally_spaced(cfg, n, 0.5 * (lo + hi))

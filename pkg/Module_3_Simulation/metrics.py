"""
Time series reported by a run and the distance of a state to the
equilibrium set E.
"""

from dataclasses import dataclass, fields
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from Module_1_Ring_Model.ring_geometry import RingConfig, FleetState, pair_geometry
from Module_1_Ring_Model.potentials import PotentialConfig, PotentialFamily, default_family


def equilibrium_residual(w: FleetState, cfg: RingConfig, pcfg: PotentialConfig,
                         family: Optional[PotentialFamily] = None) -> float:
    """
    Sum over vehicles of |v - omega* r| + |s| + |U' + W| + |sum_j V' r_j sin(dphi)/d|.
    Zero exactly on E.
    """
    family = family or default_family(cfg, pcfg)
    d, dr, dphi = pair_geometry(w, cfg)
    _, dV, _ = family.pair_arrays(d)
    _, dU = family.boundary_arrays(w.r)
    inv_d = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    rj = w.r[None, :]
    W = np.sum((cfg.p * dr + rj * 2.0 * np.sin(0.5 * dphi) ** 2) * dV * inv_d, axis=1)
    tangential = np.sum(dV * rj * np.sin(dphi) * inv_d, axis=1)
    return float(np.sum(np.abs(w.v - cfg.omega_star * w.r) + np.abs(w.s)
                        + np.abs(np.asarray(dU) + W) + np.abs(tangential)))


@dataclass(eq=False)
class MetricsSeries:
    """One value per recorded instant."""
    t: np.ndarray
    sup_angular_error: np.ndarray      # max_i |v_i / r_i - omega*|
    sup_accel: np.ndarray              # max_i |F_i|
    sup_orientation: np.ndarray        # max_i |s_i|
    min_gap: np.ndarray                # min_{i != j} d_ij
    clf: np.ndarray
    equilibrium_residual: np.ndarray
    steering_offset: np.ndarray        # max_i |delta_i - atan(sigma_i / r_i)|
    sup_turn_rate: np.ndarray          # max_i |ds_i/dt|

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({f.name: getattr(self, f.name) for f in fields(self)})

    def at(self, t: float) -> Dict[str, float]:
        """Row at the recorded instant closest to t."""
        k = int(np.argmin(np.abs(self.t - t)))
        return {f.name: float(getattr(self, f.name)[k]) for f in fields(self)}

    def summary(self) -> Dict[str, float]:
        return {
            "max_sup_angular_error": float(np.max(self.sup_angular_error)),
            "max_sup_accel": float(np.max(self.sup_accel)),
            "max_sup_orientation": float(np.max(self.sup_orientation)),
            "min_gap": float(np.min(self.min_gap)),
            "max_steering_offset": float(np.max(self.steering_offset)),
            "max_sup_turn_rate": float(np.max(self.sup_turn_rate)),
            "final_clf": float(self.clf[-1]),
            "final_equilibrium_residual": float(self.equilibrium_residual[-1]),
        }


def metrics_series(t: np.ndarray, states: np.ndarray, F: np.ndarray, delta: np.ndarray,
                   clf: np.ndarray, cfg: RingConfig, pcfg: PotentialConfig,
                   family: Optional[PotentialFamily] = None) -> MetricsSeries:
    """states is (K, 4n) in w ordering, F and delta are (K, n)."""
    family = family or default_family(cfg, pcfg)
    n = cfg.n
    r, s, v = states[:, :n], states[:, 2 * n:3 * n], states[:, 3 * n:]
    off = ~np.eye(n, dtype=bool)
    gaps: List[float] = []
    residuals: List[float] = []
    for row in states:
        w = FleetState.from_vector(row)
        if n > 1:
            gaps.append(float(np.min(pair_geometry(w, cfg)[0][off])))
        else:
            gaps.append(float("inf"))
        residuals.append(equilibrium_residual(w, cfg, pcfg, family))
    turn = v / cfg.sigma[None, :] * np.tan(delta) - v * np.cos(s) / r
    return MetricsSeries(
        t=np.asarray(t, dtype=float),
        sup_angular_error=np.max(np.abs(v / r - cfg.omega_star), axis=1),
        sup_accel=np.max(np.abs(F), axis=1),
        sup_orientation=np.max(np.abs(s), axis=1),
        min_gap=np.asarray(gaps),
        clf=np.asarray(clf, dtype=float),
        equilibrium_residual=np.asarray(residuals),
        steering_offset=np.max(np.abs(delta - np.arctan(cfg.sigma[None, :] / r)), axis=1),
        sup_turn_rate=np.max(np.abs(turn), axis=1),
    )

"""
Ring-road geometry: configuration, vehicle/fleet state types, the weighted
inter-vehicle distance, state-space (Omega) membership and polar <-> Cartesian
conversion.

- RingConfig: road radii, speed limit, angular set-point, orientation bound,
  minimum-gap and weight matrices, interaction radius, vehicle lengths
- FleetState: the vector w = (r, phi, s, v) stored as four float arrays
- check_state_space(...) returns every violated constraint with its margin
- validate_config(...) raises ConfigError listing each failed inequality
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union, Dict, Any
import math

import numpy as np

from . import events as ev

ArrayLike = Union[float, Sequence[float], Sequence[Sequence[float]], np.ndarray]


class StateSpaceError(ValueError):
    """A state lies outside Omega (or outside a function's domain)."""


class ConfigError(ValueError):
    """Configuration rejected; `issues` lists every failed inequality."""

    def __init__(self, issues: List["ConfigIssue"]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class ConfigIssue:
    name: str
    lhs: float
    relation: str
    rhs: float

    def __str__(self) -> str:
        return f"{self.name}: required {self.lhs:.6g} {self.relation} {self.rhs:.6g}"


def _matrix(value: ArrayLike, n: int) -> np.ndarray:
    m = np.array(value, dtype=float)
    if m.ndim == 0:
        m = np.full((n, n), float(m))
        np.fill_diagonal(m, 0.0)
    return m


@dataclass(eq=False)
class RingConfig:
    """Road geometry, limits and the pairwise constants of the fleet.

    L, p and sigma accept a scalar (uniform value) or a full matrix/vector.
    """
    R_in: float = 20.0
    R_out: float = 60.0
    v_max: float = 10.0
    omega_star: float = 0.15
    Theta: float = 0.17
    n: int = 10
    L: ArrayLike = 6.0
    p: ArrayLike = 5.11
    lam: float = 20.0
    sigma: ArrayLike = 5.0

    def __post_init__(self):
        self.n = int(self.n)
        # scalar inputs are kept so a one-vehicle config still echoes its L and p
        self._scalars = {k: float(getattr(self, k)) for k in ("L", "p") if np.ndim(getattr(self, k)) == 0}
        self.L = _matrix(self.L, self.n)
        self.p = _matrix(self.p, self.n)
        sig = np.array(self.sigma, dtype=float)
        self.sigma = np.full(self.n, float(sig)) if sig.ndim == 0 else sig

    @property
    def R_m(self) -> float:
        return 0.5 * (self.R_in + self.R_out)

    def with_n(self, n: int) -> "RingConfig":
        """Same road and uniform pair constants, different fleet size."""
        if not (self.is_uniform()):
            raise ConfigError([ConfigIssue("with_n requires uniform L, p, sigma", 0.0, "==", 1.0)])
        return RingConfig(R_in=self.R_in, R_out=self.R_out, v_max=self.v_max,
                          omega_star=self.omega_star, Theta=self.Theta, n=n,
                          L=self._uniform_value(self.L, "L"), p=self._uniform_value(self.p, "p"),
                          lam=self.lam, sigma=float(self.sigma[0]) if self.n else 5.0)

    def _uniform_value(self, m: np.ndarray, key: str = "") -> float:
        off = m[~np.eye(m.shape[0], dtype=bool)]
        if off.size:
            return float(off[0])
        return self._scalars.get(key, 6.0 if key == "L" else 1.0)

    def is_uniform(self) -> bool:
        off = ~np.eye(self.n, dtype=bool)
        L_off, p_off = self.L[off], self.p[off]
        return (L_off.size == 0 or (np.all(L_off == L_off[0]) and np.all(p_off == p_off[0]))) \
            and bool(np.all(self.sigma == self.sigma[0]))

    def to_dict(self) -> Dict[str, Any]:
        if self.is_uniform():
            L: Any = self._uniform_value(self.L, "L")
            p: Any = self._uniform_value(self.p, "p")
            sigma: Any = float(self.sigma[0])
        else:
            L, p, sigma = self.L.tolist(), self.p.tolist(), self.sigma.tolist()
        return {
            "R_in": self.R_in, "R_out": self.R_out, "v_max": self.v_max,
            "omega_star": self.omega_star, "Theta": self.Theta, "n": self.n,
            "L": L, "p": p, "lam": self.lam, "sigma": sigma,
        }


@dataclass(frozen=True)
class VehicleState:
    r: float
    phi: float
    s: float
    v: float
    sigma: float = 5.0


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class FleetState:
    """The fleet state w of n vehicles, one float array per coordinate."""
    r: np.ndarray
    phi: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("r", "phi", "s", "v"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if not (self.r.size == self.phi.size == self.s.size == self.v.size):
            raise StateSpaceError("r, phi, s, v must have equal length")

    @property
    def n(self) -> int:
        return int(self.r.size)

    @classmethod
    def from_vehicles(cls, vehicles: Sequence[VehicleState]) -> "FleetState":
        return cls(r=[x.r for x in vehicles], phi=[x.phi for x in vehicles],
                   s=[x.s for x in vehicles], v=[x.v for x in vehicles])

    @classmethod
    def from_vector(cls, w: np.ndarray) -> "FleetState":
        w = np.asarray(w, dtype=float)
        n = w.size // 4
        return cls(r=w[:n], phi=w[n:2 * n], s=w[2 * n:3 * n], v=w[3 * n:])

    def as_vector(self) -> np.ndarray:
        """w = (r_1..r_n, phi_1..phi_n, s_1..s_n, v_1..v_n)."""
        return np.concatenate([self.r, self.phi, self.s, self.v])

    def vehicle(self, i: int, sigma: float = 5.0) -> VehicleState:
        return VehicleState(float(self.r[i]), float(self.phi[i]), float(self.s[i]),
                            float(self.v[i]), sigma)

    def vehicles(self, cfg: Optional[RingConfig] = None) -> List[VehicleState]:
        sig = cfg.sigma if cfg is not None else np.full(self.n, 5.0)
        return [self.vehicle(i, float(sig[i])) for i in range(self.n)]

    def replace(self, **changes) -> "FleetState":
        data = {"r": self.r, "phi": self.phi, "s": self.s, "v": self.v}
        data.update(changes)
        return FleetState(**data)

    def with_value(self, field_name: str, i: int, value: float) -> "FleetState":
        arr = np.array(getattr(self, field_name))
        arr[i] = value
        return self.replace(**{field_name: arr})


@lru_cache(maxsize=None)
def off_diagonal(n: int) -> np.ndarray:
    """Read-only n x n mask of the pairs i != j."""
    mask = ~np.eye(n, dtype=bool)
    mask.flags.writeable = False
    return mask


def _one_minus_cos(x):
    # 2 sin^2(x/2) keeps precision for nearly aligned vehicles
    return 2.0 * np.sin(0.5 * x) ** 2


def weighted_distance(a: VehicleState, b: VehicleState, p_ab: float) -> float:
    """d = sqrt(p (r_a - r_b)^2 + 2 r_a r_b (1 - cos(phi_a - phi_b)))."""
    dr = a.r - b.r
    sq = p_ab * dr * dr + 2.0 * a.r * b.r * 2.0 * math.sin(0.5 * (a.phi - b.phi)) ** 2
    return math.sqrt(max(sq, 0.0))


def pair_geometry(w: FleetState, cfg: RingConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (d, dr, dphi) as n x n arrays; d has zeros on the diagonal."""
    dr = w.r[:, None] - w.r[None, :]
    dphi = w.phi[:, None] - w.phi[None, :]
    sq = cfg.p * dr * dr + 2.0 * np.outer(w.r, w.r) * _one_minus_cos(dphi)
    d = np.sqrt(np.maximum(sq, 0.0))
    np.fill_diagonal(d, 0.0)
    return d, dr, dphi


def distance_matrix(w: FleetState, cfg: RingConfig) -> np.ndarray:
    return pair_geometry(w, cfg)[0]


@dataclass(frozen=True)
class Violation:
    constraint: str
    vehicles: Tuple[int, ...]
    value: float
    bound: float
    margin: float


@dataclass
class MembershipReport:
    member: bool
    violations: List[Violation] = field(default_factory=list)
    # smallest margin seen per constraint family
    margins: Dict[str, float] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.member


def state_margins(w: FleetState, cfg: RingConfig) -> Dict[str, float]:
    """Smallest margin of each Omega constraint family (positive inside Omega)."""
    margins = {
        "r_inner": float(np.min(w.r - cfg.R_in)),
        "r_outer": float(np.min(cfg.R_out - w.r)),
        "v_positive": float(np.min(w.v)),
        "v_limit": float(np.min(cfg.v_max - w.v)),
        "orientation": float(np.min(cfg.Theta - np.abs(w.s))),
    }
    if w.n > 1:
        d = distance_matrix(w, cfg)
        off = off_diagonal(w.n)
        margins["gap"] = float(np.min((d - cfg.L)[off]))
        margins["min_distance"] = float(np.min(d[off]))
    return margins


def check_state_space(w: FleetState, cfg: RingConfig) -> MembershipReport:
    """Strict membership test of w in Omega; zero tolerance, no clamping."""
    if w.n != cfg.n:
        raise StateSpaceError(f"fleet has {w.n} vehicles, configuration expects {cfg.n}")
    out: List[Violation] = []
    for i in range(w.n):
        r, s, v = float(w.r[i]), float(w.s[i]), float(w.v[i])
        if not r > cfg.R_in:
            out.append(Violation("r > R_in", (i,), r, cfg.R_in, r - cfg.R_in))
        if not r < cfg.R_out:
            out.append(Violation("r < R_out", (i,), r, cfg.R_out, cfg.R_out - r))
        if not v > 0.0:
            out.append(Violation("v > 0", (i,), v, 0.0, v))
        if not v < cfg.v_max:
            out.append(Violation("v < v_max", (i,), v, cfg.v_max, cfg.v_max - v))
        if not abs(s) < cfg.Theta:
            out.append(Violation("|s| < Theta", (i,), s, cfg.Theta, cfg.Theta - abs(s)))
    if w.n > 1:
        d = distance_matrix(w, cfg)
        for i in range(w.n):
            for j in range(i + 1, w.n):
                if not d[i, j] > cfg.L[i, j]:
                    out.append(Violation("d_ij > L_ij", (i, j), float(d[i, j]), float(cfg.L[i, j]),
                                         float(d[i, j] - cfg.L[i, j])))
    return MembershipReport(member=not out, violations=out, margins=state_margins(w, cfg))


def require_member(w: FleetState, cfg: RingConfig) -> None:
    report = check_state_space(w, cfg)
    if not report.member:
        first = report.violations[0]
        raise StateSpaceError(
            f"state outside Omega: {first.constraint} for vehicles {first.vehicles} "
            f"(margin {first.margin:.3g}); {len(report.violations)} violation(s)"
        )


def validate_config(cfg: RingConfig) -> RingConfig:
    """Returns cfg if every RingConfig invariant holds, else raises ConfigError."""
    issues: List[ConfigIssue] = []

    def need(ok: bool, name: str, lhs: float, rel: str, rhs: float):
        if not ok:
            issues.append(ConfigIssue(name, float(lhs), rel, float(rhs)))

    need(cfg.R_in > 0, "R_in > 0", cfg.R_in, ">", 0.0)
    need(cfg.R_out > cfg.R_in, "R_out > R_in", cfg.R_out, ">", cfg.R_in)
    need(cfg.v_max > 0, "v_max > 0", cfg.v_max, ">", 0.0)
    need(cfg.omega_star > 0, "omega_star > 0", cfg.omega_star, ">", 0.0)
    if cfg.v_max > 0 and cfg.R_out > 0:
        need(cfg.omega_star < cfg.v_max / cfg.R_out, "omega_star < v_max/R_out",
             cfg.omega_star, "<", cfg.v_max / cfg.R_out)
    need(0 < cfg.Theta < math.pi / 2, "0 < Theta < pi/2", cfg.Theta, "in", math.pi / 2)
    if cfg.v_max > 0:
        need(math.cos(cfg.Theta) > cfg.R_out * cfg.omega_star / cfg.v_max,
             "cos(Theta) > R_out*omega_star/v_max",
             math.cos(cfg.Theta), ">", cfg.R_out * cfg.omega_star / cfg.v_max)
    need(cfg.n >= 1, "n >= 1", cfg.n, ">=", 1)

    shapes_ok = cfg.L.shape == (cfg.n, cfg.n) and cfg.p.shape == (cfg.n, cfg.n) \
        and cfg.sigma.shape == (cfg.n,)
    need(shapes_ok, "L, p are n x n and sigma has n entries", float(cfg.L.size), "==", float(cfg.n * cfg.n))
    if shapes_ok:
        off = ~np.eye(cfg.n, dtype=bool)
        need(bool(np.all(cfg.sigma > 0)), "sigma_i > 0", float(np.min(cfg.sigma)), ">", 0.0)
        if cfg.n > 1:
            L_off, p_off = cfg.L[off], cfg.p[off]
            need(bool(np.all(L_off > 0)), "L_ij > 0", float(np.min(L_off)), ">", 0.0)
            need(bool(np.all(p_off > 0)), "p_ij > 0", float(np.min(p_off)), ">", 0.0)
            need(bool(np.allclose(cfg.L, cfg.L.T, rtol=0, atol=0)), "L_ij = L_ji",
                 float(np.max(np.abs(cfg.L - cfg.L.T))), "==", 0.0)
            need(bool(np.allclose(cfg.p, cfg.p.T, rtol=0, atol=0)), "p_ij = p_ji",
                 float(np.max(np.abs(cfg.p - cfg.p.T))), "==", 0.0)
            need(cfg.lam > float(np.max(L_off)), "lambda > max L_ij", cfg.lam, ">", float(np.max(L_off)))
            if not issues and np.any(p_off < 1):
                ev.emit_config_warning("p", "p_ij < 1: distance estimates assume p_ij >= 1",
                                       float(np.min(p_off)))

    if issues:
        ev.emit_config_rejected([str(i) for i in issues])
        raise ConfigError(issues)
    return cfg


def polar_from_cartesian(x: float, y: float, theta: float, v: float,
                         phi_ref: Optional[float] = None, sigma: float = 5.0) -> VehicleState:
    """
    (x, y, theta, v) -> (r, phi, s, v). phi continues phi_ref (nearest branch)
    when given; s is wrapped into (-pi, pi].
    """
    r = math.hypot(x, y)
    if r == 0.0:
        raise StateSpaceError("the ring centre (0, 0) has no polar angle")
    phi = math.atan2(y, x)
    if phi_ref is not None:
        phi = phi_ref + _wrap(phi - phi_ref)
    s = _wrap(theta - phi - math.pi / 2)
    return VehicleState(r=r, phi=phi, s=s, v=v, sigma=sigma)


def cartesian_from_polar(state: VehicleState) -> Tuple[float, float, float, float]:
    x = state.r * math.cos(state.phi)
    y = state.r * math.sin(state.phi)
    theta = state.s + state.phi + math.pi / 2
    return x, y, theta, state.v


def _wrap(a: float) -> float:
    """Angle into (-pi, pi]."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w

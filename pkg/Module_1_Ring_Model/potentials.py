"""
Potential, viscosity and gain-shaping functions with analytic derivatives,
plus an axiom checker for user-supplied families.

- vehicle_potential: V(d) = q1 (lam - d)^3 / (d - L) on (L, lam], 0 beyond
- boundary_potential: U(r) = ((r-R_m)^2 - c^2)^3 / ((r-R_in)(R_out-r)) outside the free annulus
- viscosity_kernel: kappa(d) = q2 (lam - d)^2 on (L, lam], 0 beyond
- gain_shaping_f: the C^1 ramp used by the Newtonian gain
- PotentialFamily bundles one choice of all functions; check_axioms() audits it
"""

from dataclasses import dataclass, field
from typing import Callable, List, Tuple, Dict, Any, Optional

import numpy as np

from .ring_geometry import RingConfig, ConfigError, ConfigIssue, StateSpaceError, off_diagonal
from . import events as ev


@dataclass
class PotentialConfig:
    q1: float = 3e-3
    q2: float = 0.0
    c: float = 10.0
    epsilon: float = 0.2
    mu1: float = 0.3
    mu2: float = 100.0
    A: float = 0.5
    b: float = 1.0

    @property
    def viscous(self) -> bool:
        return self.q2 > 0

    def to_dict(self) -> Dict[str, Any]:
        return {"q1": self.q1, "q2": self.q2, "c": self.c, "epsilon": self.epsilon,
                "mu1": self.mu1, "mu2": self.mu2, "A": self.A, "b": self.b}


def validate_potentials(pcfg: PotentialConfig, cfg: RingConfig) -> PotentialConfig:
    issues: List[ConfigIssue] = []

    def need(ok, name, lhs, rel, rhs):
        if not ok:
            issues.append(ConfigIssue(name, float(lhs), rel, float(rhs)))

    need(pcfg.q1 > 0, "q1 > 0", pcfg.q1, ">", 0.0)
    need(pcfg.q2 >= 0, "q2 >= 0", pcfg.q2, ">=", 0.0)
    need(pcfg.c > 0, "c > 0", pcfg.c, ">", 0.0)
    need(pcfg.c < 0.5 * (cfg.R_out - cfg.R_in), "c < (R_out - R_in)/2", pcfg.c, "<",
         0.5 * (cfg.R_out - cfg.R_in))
    need(pcfg.epsilon > 0, "epsilon > 0", pcfg.epsilon, ">", 0.0)
    need(pcfg.mu1 > 0, "mu1 > 0", pcfg.mu1, ">", 0.0)
    need(pcfg.mu2 > 0, "mu2 > 0", pcfg.mu2, ">", 0.0)
    need(pcfg.A > 0, "A > 0", pcfg.A, ">", 0.0)
    need(pcfg.b > 1.0 / cfg.R_in ** 2, "b > 1/R_in^2", pcfg.b, ">", 1.0 / cfg.R_in ** 2)
    if issues:
        ev.emit_config_rejected([str(i) for i in issues])
        raise ConfigError(issues)
    return pcfg


def _out(*values, scalar: bool):
    if scalar:
        return tuple(float(v) for v in values)
    return values


def vehicle_potential(d, L, lam, q1):
    """(V, V', V'') of q1 (lam - d)^3 / (d - L); exactly zero for d >= lam."""
    scalar = np.ndim(d) == 0
    d = np.asarray(d, dtype=float)
    L = np.broadcast_to(np.asarray(L, dtype=float), d.shape)
    if np.any(d <= L):
        raise StateSpaceError("vehicle potential evaluated at d <= L")
    u = np.where(d < lam, lam - d, 0.0)
    z = d - L
    V = q1 * u ** 3 / z
    dV = -q1 * u ** 2 * (3.0 * z + u) / z ** 2
    d2V = q1 * (6.0 * u * z ** 2 + 6.0 * u ** 2 * z + 2.0 * u ** 3) / z ** 3
    return _out(V, dV, d2V, scalar=scalar)


def boundary_potential(r, R_in, R_out, c):
    """(U, U'); zero on the free annulus |r - R_m| <= c, blowing up at both radii."""
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=float)
    if np.any(r <= R_in) or np.any(r >= R_out):
        raise StateSpaceError("boundary potential evaluated outside (R_in, R_out)")
    x = r - 0.5 * (R_in + R_out)
    e = np.where(np.abs(x) > c, x * x - c * c, 0.0)
    Q = (r - R_in) * (R_out - r)
    U = e ** 3 / Q
    dU = (6.0 * x * e ** 2 * Q + 2.0 * x * e ** 3) / Q ** 2
    return _out(U, dU, scalar=scalar)


def viscosity_kernel(d, L, lam, q2):
    """(kappa, kappa') of q2 (lam - d)^2; q2 = 0 gives the inviscid controllers."""
    scalar = np.ndim(d) == 0
    d = np.asarray(d, dtype=float)
    L = np.broadcast_to(np.asarray(L, dtype=float), d.shape)
    if np.any(d <= L):
        raise StateSpaceError("viscosity kernel evaluated at d <= L")
    u = np.where(d < lam, lam - d, 0.0)
    return _out(q2 * u ** 2, -2.0 * q2 * u, scalar=scalar)


def gain_shaping_f(x, epsilon):
    """0 for x <= -eps, (x+eps)^2/(2 eps) on (-eps, 0), x + eps/2 for x >= 0."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    val = np.where(x <= -epsilon, 0.0,
                   np.where(x < 0.0, (x + epsilon) ** 2 / (2.0 * epsilon),
                            (epsilon ** 2 + 2.0 * epsilon * x) / (2.0 * epsilon)))
    return float(val) if scalar else val


def gain_shaping_df(x, epsilon):
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    val = np.where(x <= -epsilon, 0.0, np.where(x < 0.0, (x + epsilon) / epsilon, 1.0))
    return float(val) if scalar else val


@dataclass
class ShapingFunctions:
    """g1, g2 (non-decreasing), f (Newtonian gain ramp), f1, f2 (relativistic)."""
    g1: Callable = field(default=lambda x: x)
    g2: Callable = field(default=lambda x: x)
    f: Callable = field(default=lambda x: gain_shaping_f(x, 0.2))
    f1: Callable = field(default=lambda x: 0.3 * x)
    f2: Callable = field(default=lambda x: 100.0 * x)
    name: str = "default"


def shaping_defaults(pcfg: Optional[PotentialConfig] = None) -> ShapingFunctions:
    """g1 = g2 = identity, f = ramp(eps), f1 = mu1 x, f2 = mu2 x."""
    pcfg = pcfg or PotentialConfig()
    eps, mu1, mu2 = pcfg.epsilon, pcfg.mu1, pcfg.mu2
    return ShapingFunctions(
        g1=lambda x: x,
        g2=lambda x: x,
        f=lambda x: gain_shaping_f(x, eps),
        f1=lambda x: mu1 * x,
        f2=lambda x: mu2 * x,
        name="default",
    )


# Pair-indexed function hooks. Each takes (d, L_ij, lam, i, j).
PairFn = Callable[..., Tuple]


class PotentialFamily:
    """
    One concrete choice of V_ij, U_i, kappa_ij and the shaping functions.

    The default family uses the same V, kappa for every pair; custom hooks
    receive the pair indices so heterogeneous families remain possible.
    """

    def __init__(self, cfg: RingConfig, pcfg: PotentialConfig,
                 shaping: Optional[ShapingFunctions] = None,
                 V_fn: Optional[PairFn] = None,
                 U_fn: Optional[Callable] = None,
                 kappa_fn: Optional[PairFn] = None):
        self.cfg = cfg
        self.pcfg = pcfg
        self.shaping = shaping or shaping_defaults(pcfg)
        self.custom = any(fn is not None for fn in (V_fn, U_fn, kappa_fn))
        self._vectorized_U = U_fn is None
        self._V_fn = V_fn or (lambda d, L, lam, i, j: vehicle_potential(d, L, lam, pcfg.q1))
        self._U_fn = U_fn or (lambda r, i: boundary_potential(r, cfg.R_in, cfg.R_out, pcfg.c))
        self._kappa_fn = kappa_fn or (lambda d, L, lam, i, j: viscosity_kernel(d, L, lam, pcfg.q2))
        # branch joins where C^2 (V, U) / C^1 (kappa) continuity is audited
        self.V_joins = [cfg.lam] if V_fn is None else []
        self.U_joins = [cfg.R_m - pcfg.c, cfg.R_m + pcfg.c] if U_fn is None else []

    def V(self, d, i: int = 0, j: int = 1):
        return self._V_fn(d, self.cfg.L[i, j] if self.cfg.n > 1 else _scalar_L(self.cfg), self.cfg.lam, i, j)

    def U(self, r, i: int = 0):
        return self._U_fn(r, i)

    def kappa(self, d, i: int = 0, j: int = 1):
        return self._kappa_fn(d, self.cfg.L[i, j] if self.cfg.n > 1 else _scalar_L(self.cfg), self.cfg.lam, i, j)

    def pair_arrays(self, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        (V, V', kappa) as n x n arrays over the interaction mask
        {i != j, d_ij < lam}; zero elsewhere.
        """
        n = d.shape[0]
        V = np.zeros_like(d)
        dV = np.zeros_like(d)
        K = np.zeros_like(d)
        off = off_diagonal(n)
        if n > 1 and np.any(d[off] <= self.cfg.L[off]):
            raise StateSpaceError("pair distance at or below its minimum gap")
        mask = off & (d < self.cfg.lam)
        if not np.any(mask):
            return V, dV, K
        if not self.custom:
            Ld = self.cfg.L[mask]
            v, dv, _ = vehicle_potential(d[mask], Ld, self.cfg.lam, self.pcfg.q1)
            k, _ = viscosity_kernel(d[mask], Ld, self.cfg.lam, self.pcfg.q2)
            V[mask], dV[mask], K[mask] = v, dv, k
            return V, dV, K
        for i, j in zip(*np.nonzero(mask)):
            v, dv, _ = self.V(float(d[i, j]), int(i), int(j))
            k, _ = self.kappa(float(d[i, j]), int(i), int(j))
            V[i, j], dV[i, j], K[i, j] = v, dv, k
        return V, dV, K

    def boundary_arrays(self, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self._vectorized_U:
            return boundary_potential(r, self.cfg.R_in, self.cfg.R_out, self.pcfg.c)
        out = [self.U(float(x), i) for i, x in enumerate(r)]
        return np.array([u for u, _ in out]), np.array([du for _, du in out])


def _scalar_L(cfg: RingConfig) -> float:
    return cfg._uniform_value(cfg.L, "L")


def default_family(cfg: RingConfig, pcfg: PotentialConfig) -> PotentialFamily:
    return PotentialFamily(cfg, pcfg, shaping_defaults(pcfg))


@dataclass(frozen=True)
class AxiomFailure:
    axiom: str
    point: float
    detail: str


@dataclass
class AxiomReport:
    passed: bool
    failures: List[AxiomFailure] = field(default_factory=list)
    checked: List[str] = field(default_factory=list)

    def failed_axioms(self) -> List[str]:
        return sorted({f.axiom for f in self.failures})


def _pairs(cfg: RingConfig):
    if cfg.n < 2:
        return [(0, 1)]
    return [(i, j) for i in range(cfg.n) for j in range(cfg.n) if i < j]


def _unique_pairs(cfg: RingConfig, family: PotentialFamily):
    # uniform families share one function; auditing one pair covers all
    if not family.custom and cfg.is_uniform():
        return [_pairs(cfg)[0]]
    return _pairs(cfg)


def check_axioms(family: PotentialFamily, cfg: RingConfig, grid_size: int = 200) -> AxiomReport:
    """
    Sample every function of the family and test the axioms: blow-up of V at
    L and of U at both radii (strict growth along a geometric approach), zero
    support of V and kappa beyond lam, symmetry, non-negativity, f >= max(0, x),
    x f_j(x) > 0, monotone g_k, and continuity at branch joins.
    """
    failures: List[AxiomFailure] = []
    checked: List[str] = []

    def fail(axiom, point, detail):
        failures.append(AxiomFailure(axiom, float(point), detail))

    lam = cfg.lam
    for i, j in _unique_pairs(cfg, family):
        L = float(cfg.L[i, j]) if cfg.n > 1 else _scalar_L(cfg)
        grid = np.linspace(L, 2.0 * cfg.R_out, grid_size + 1)[1:]
        beyond = np.concatenate([[lam], np.linspace(lam, 2.0 * cfg.R_out + lam, grid_size)[1:]])

        checked.append("V_blowup")
        approach = [family.V(L + 10.0 ** (-k), i, j)[0] for k in range(1, 9)]
        for k in range(1, 8):
            if not approach[k] > approach[k - 1]:
                fail("V_blowup", L + 10.0 ** (-(k + 1)), f"V not increasing toward L (pair {i},{j})")
        if approach[0] <= 0:
            fail("V_blowup", L + 0.1, "V not positive near L")

        checked.append("V_nonnegative")
        for d in grid:
            if family.V(d, i, j)[0] < 0:
                fail("V_nonnegative", d, f"V({d:.4g}) < 0")
                break

        checked.append("V_zero_beyond_lambda")
        checked.append("kappa_zero_beyond_lambda")
        for d in beyond:
            vals = family.V(d, i, j)
            if any(x != 0.0 for x in vals):
                fail("V_zero_beyond_lambda", d, f"V or derivatives nonzero at d={d:.4g}")
                break
        for d in beyond:
            vals = family.kappa(d, i, j)
            if any(x != 0.0 for x in vals):
                fail("kappa_zero_beyond_lambda", d, f"kappa nonzero at d={d:.4g}")
                break

        checked.append("kappa_nonnegative")
        for d in grid:
            if family.kappa(d, i, j)[0] < 0:
                fail("kappa_nonnegative", d, f"kappa({d:.4g}) < 0")
                break

        checked.append("pair_symmetry")
        for d in grid[:: max(1, grid_size // 20)]:
            if family.V(d, i, j)[0] != family.V(d, j, i)[0] or \
                    family.kappa(d, i, j)[0] != family.kappa(d, j, i)[0]:
                fail("pair_symmetry", d, f"V or kappa differ for ({i},{j}) and ({j},{i})")
                break

    checked.append("V_smooth_at_joins")
    for x in family.V_joins:
        _check_join(lambda d: family.V(d)[:3], x, "V_smooth_at_joins", fail)

    n_veh = max(cfg.n, 1)
    for i in range(n_veh if family.custom else 1):
        checked.append("U_blowup")
        inner = [family.U(cfg.R_in + 10.0 ** (-k), i)[0] for k in range(1, 9)]
        outer = [family.U(cfg.R_out - 10.0 ** (-k), i)[0] for k in range(1, 9)]
        for k in range(1, 8):
            if not inner[k] > inner[k - 1]:
                fail("U_blowup", cfg.R_in + 10.0 ** (-(k + 1)), "U not increasing toward R_in")
            if not outer[k] > outer[k - 1]:
                fail("U_blowup", cfg.R_out - 10.0 ** (-(k + 1)), "U not increasing toward R_out")
        checked.append("U_nonnegative")
        for r in np.linspace(cfg.R_in, cfg.R_out, grid_size + 2)[1:-1]:
            if family.U(r, i)[0] < 0:
                fail("U_nonnegative", r, f"U({r:.4g}) < 0")
                break

    checked.append("U_smooth_at_joins")
    for x in family.U_joins:
        _check_join(lambda r: _with_fd_second(family.U, r), x, "U_smooth_at_joins", fail)

    sh = family.shaping
    xs = np.linspace(-5.0, 5.0, 2 * grid_size + 1)
    checked.append("f_dominates_ramp")
    for x in xs:
        fx = float(sh.f(x))
        if fx < max(0.0, x) or fx < 0:
            fail("f_dominates_ramp", x, f"f({x:.4g}) = {fx:.4g} < max(0, x)")
            break
    checked.append("f_j_sign")
    for name in ("f1", "f2"):
        fn = getattr(sh, name)
        if float(fn(0.0)) != 0.0:
            fail("f_j_sign", 0.0, f"{name}(0) != 0")
        for x in xs:
            if x != 0.0 and not x * float(fn(x)) > 0:
                fail("f_j_sign", x, f"x*{name}(x) <= 0")
                break
    checked.append("g_nondecreasing")
    for name in ("g1", "g2"):
        vals = np.array([float(getattr(sh, name)(x)) for x in xs])
        bad = np.nonzero(np.diff(vals) < 0)[0]
        if bad.size:
            fail("g_nondecreasing", xs[bad[0]], f"{name} decreases")

    report = AxiomReport(passed=not failures, failures=failures, checked=sorted(set(checked)))
    ev.emit_axiom_check("potential_family", report.passed, len(failures))
    return report


def _check_join(fn: Callable, x0: float, axiom: str, fail: Callable) -> None:
    """Jumps across a branch join must shrink with the probe offset and vanish."""
    previous = None
    for h in (1e-2, 1e-3, 1e-4, 1e-5):
        left, right = fn(x0 - h), fn(x0 + h)
        jump = max(abs(a - b) for a, b in zip(left, right))
        scale = 1.0 + max(abs(a) for a in left + right)
        if previous is not None and jump > previous * (1 + 1e-9) and jump > 1e-12 * scale:
            fail(axiom, x0, f"derivative jump grows as the probe shrinks (h={h:g})")
            return
        previous = jump
    if previous > 1e-3 * scale:
        fail(axiom, x0, f"discontinuity of size {previous:.3g} at join")


def _with_fd_second(U: Callable, r: float, h: float = 1e-7) -> Tuple[float, float, float]:
    u, du = U(r)[:2]
    d2u = (U(r + h)[1] - U(r - h)[1]) / (2.0 * h)
    return u, du, d2u

"""
Scenario definition and JSON scenario files.

A scenario file is a JSON object with the sections
  ring, potentials, controller, integrator, init, outputs, monitors
Missing keys fall back to the published parameter set. dump_scenario()
writes the resolved scenario back in the same format (sorted keys), so an
echoed file reproduces its run exactly.
"""

from dataclasses import dataclass, field, fields, asdict
from typing import Any, Dict, List, Optional
import copy
import json
import os

from Module_1_Ring_Model.ring_geometry import (
    RingConfig, FleetState, ConfigError, ConfigIssue, validate_config, check_state_space,
)
from Module_1_Ring_Model.potentials import PotentialConfig, validate_potentials
from Module_1_Ring_Model.dynamics import IntegratorConfig

SECTIONS = ("ring", "potentials", "controller", "integrator", "init", "outputs", "monitors")


@dataclass
class ControllerSpec:
    family: str = "ncc"
    viscous: bool = False
    shaping: str = "default"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class InitSpec:
    """Seeded sampler margins, or an explicit fleet state."""
    seed: int = 42
    margin_r: float = 8.0
    margin_s: float = 0.02
    margin_v: float = 0.5
    margin_d: float = 1.0
    max_attempts: int = 20000
    state: Optional[Dict[str, List[float]]] = None

    def explicit_state(self) -> Optional[FleetState]:
        if self.state is None:
            return None
        return FleetState(r=self.state["r"], phi=self.state["phi"], s=self.state["s"], v=self.state["v"])

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        if self.state is None:
            out.pop("state")
        return out


@dataclass
class OutputSpec:
    directory: str = "runs/default"
    write_plots: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MonitorSpec:
    clf_tol: float = 1e-6
    dissipation_every: int = 100
    dissipation_tol: float = 1e-6
    fd_step: float = 1e-6
    convergence_tol: float = 1e-3
    # share of dissipation checks allowed to end in ResolutionError
    max_unresolved_share: float = 0.1

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(eq=False)
class Scenario:
    name: str = "ncc_inviscid"
    ring: RingConfig = field(default_factory=RingConfig)
    potentials: PotentialConfig = field(default_factory=PotentialConfig)
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    init: InitSpec = field(default_factory=InitSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    monitors: MonitorSpec = field(default_factory=MonitorSpec)

    def effective_potentials(self) -> PotentialConfig:
        """The inviscid controllers run with kappa identically zero."""
        data = self.potentials.to_dict()
        if not self.controller.viscous:
            data["q2"] = 0.0
        return PotentialConfig(**data)

    def validate(self) -> "Scenario":
        validate_config(self.ring)
        validate_potentials(self.potentials, self.ring)
        self.integrator.validate()
        issues: List[ConfigIssue] = []
        if self.controller.family not in ("ncc", "prcc"):
            issues.append(ConfigIssue(f"controller.family in (ncc, prcc), got {self.controller.family}", 0, "==", 1))
        if self.controller.shaping != "default":
            issues.append(ConfigIssue(f"controller.shaping == default, got {self.controller.shaping}", 0, "==", 1))
        if self.controller.viscous and not self.potentials.q2 > 0:
            issues.append(ConfigIssue("viscous controller needs q2 > 0", self.potentials.q2, ">", 0.0))
        if self.monitors.dissipation_every < 1:
            issues.append(ConfigIssue("monitors.dissipation_every >= 1", self.monitors.dissipation_every, ">=", 1))
        if not 0.0 <= self.monitors.max_unresolved_share <= 1.0:
            issues.append(ConfigIssue("monitors.max_unresolved_share in [0, 1]",
                                      self.monitors.max_unresolved_share, "<=", 1.0))
        if issues:
            raise ConfigError(issues)
        explicit = self.init.explicit_state()
        if explicit is not None:
            report = check_state_space(explicit, self.ring)
            if not report.member:
                raise ConfigError([ConfigIssue(f"initial state in Omega: {v.constraint} {v.vehicles}",
                                               v.value, ">", v.bound) for v in report.violations])
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "ring": self.ring.to_dict(),
            "potentials": self.potentials.to_dict(),
            "controller": self.controller.to_dict(),
            "integrator": self.integrator.to_dict(),
            "init": self.init.to_dict(),
            "outputs": self.outputs.to_dict(),
            "monitors": self.monitors.to_dict(),
        }


def _build(cls, data: Dict[str, Any], section: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([ConfigIssue(f"unknown key(s) {unknown} in section '{section}'", 0, "==", 1)])
    return cls(**data)


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    unknown = sorted(set(data) - set(SECTIONS) - {"name"})
    if unknown:
        raise ConfigError([ConfigIssue(f"unknown section(s) {unknown}", 0, "==", 1)])
    return Scenario(
        name=str(data.get("name", "scenario")),
        ring=_build(RingConfig, data.get("ring", {}), "ring"),
        potentials=_build(PotentialConfig, data.get("potentials", {}), "potentials"),
        controller=_build(ControllerSpec, data.get("controller", {}), "controller"),
        integrator=_build(IntegratorConfig, data.get("integrator", {}), "integrator"),
        init=_build(InitSpec, data.get("init", {}), "init"),
        outputs=_build(OutputSpec, data.get("outputs", {}), "outputs"),
        monitors=_build(MonitorSpec, data.get("monitors", {}), "monitors"),
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError([ConfigIssue(f"{path} is not valid JSON ({exc})", 0, "==", 1)]) from exc
    return scenario_from_dict(data)


def scenario_json(sc: Scenario) -> str:
    return json.dumps(sc.to_dict(), indent=2, sort_keys=True) + "\n"


def dump_scenario(sc: Scenario, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(scenario_json(sc))
    return path


def parse_value(text: str) -> Any:
    """'0.1' -> 0.1, 'true' -> True, 'prcc' -> 'prcc'."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def with_override(data: Dict[str, Any], key: str, value: Any) -> Dict[str, Any]:
    """Copy of a scenario dict with the dotted key set, e.g. 'potentials.q2'."""
    out = copy.deepcopy(data)
    parts = key.split(".")
    node = out
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError([ConfigIssue(f"cannot override {key}: '{part}' is not a section", 0, "==", 1)])
    node[parts[-1]] = value
    return out

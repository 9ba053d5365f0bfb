"""
Event constructor wrappers for Module 3 (runs, monitors, outputs, sweeps).
"""

from Module_1_Ring_Model.utils import emit_event
from typing import Dict, Any, Optional


def emit_run_start(scenario: str, controller: str, n: int, steps: int, H0: float) -> Dict[str, Any]:
    ev = {"type": "run_start", "scenario": scenario, "controller": controller,
          "n": n, "steps": steps, "H0": H0}
    emit_event(ev)
    return ev


def emit_run_checkpoint(t: float, H: float, residual: float, min_gap: float) -> Dict[str, Any]:
    ev = {"type": "run_checkpoint", "t": t, "H": H, "equilibrium_residual": residual, "min_gap": min_gap}
    emit_event(ev)
    return ev


def emit_clf_increase(t: float, H_prev: float, H: float, tolerance: float) -> Dict[str, Any]:
    ev = {"type": "clf_increase", "t": t, "H_prev": H_prev, "H": H, "tolerance": tolerance}
    emit_event(ev)
    return ev


def emit_dissipation_unresolved(t: float, detail: str) -> Dict[str, Any]:
    ev = {"type": "dissipation_unresolved", "t": t, "detail": detail}
    emit_event(ev)
    return ev


def emit_monitor_violation(t: float, monitor: str, detail: str) -> Dict[str, Any]:
    ev = {"type": "monitor_violation", "t": t, "monitor": monitor, "detail": detail}
    emit_event(ev)
    return ev


def emit_run_complete(scenario: str, passed: bool, t: float, steps: int,
                      violation: Optional[str]) -> Dict[str, Any]:
    ev = {"type": "run_complete", "scenario": scenario, "passed": passed, "t": t,
          "steps": steps, "violation": violation}
    emit_event(ev)
    return ev


def emit_outputs_written(directory: str, files: Dict[str, str]) -> Dict[str, Any]:
    ev = {"type": "outputs_written", "directory": directory, "files": dict(files)}
    emit_event(ev)
    return ev


def emit_sweep_run(index: int, overrides: Dict[str, Any], directory: str, exit_code: int) -> Dict[str, Any]:
    ev = {"type": "sweep_run", "index": index, "overrides": dict(overrides),
          "directory": directory, "exit_code": exit_code}
    emit_event(ev)
    return ev

"""
Event helper wrappers for Module 1. These create structured event dicts
and call utils.emit_event().

All functions return the dict they emitted for in-process use.
"""

from .utils import emit_event
from typing import Dict, Any, List


def emit_config_warning(field: str, message: str, value: float) -> Dict[str, Any]:
    ev = {"type": "config_warning", "field": field, "message": message, "value": value}
    emit_event(ev)
    return ev


def emit_config_rejected(issues: List[str]) -> Dict[str, Any]:
    ev = {"type": "config_rejected", "issues": list(issues)}
    emit_event(ev)
    return ev


def emit_membership_violation(t: float, constraint: str, vehicles: List[int], margin: float) -> Dict[str, Any]:
    ev = {
        "type": "membership_violation",
        "t": t,
        "constraint": constraint,
        "vehicles": list(vehicles),
        "margin": margin,
    }
    emit_event(ev)
    return ev


def emit_axiom_check(name: str, passed: bool, failures: int) -> Dict[str, Any]:
    ev = {"type": "axiom_check", "name": name, "passed": passed, "failures": failures}
    emit_event(ev)
    return ev

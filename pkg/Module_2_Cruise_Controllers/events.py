"""
Event constructor wrappers for Module 2.
"""

from Module_1_Ring_Model.utils import emit_event
from typing import Dict, Any, Optional


def emit_dissipation_check(t: Optional[float], controller: str, dH_dt: float, bound: float,
                           margin: float, identity_error: float) -> Dict[str, Any]:
    ev = {
        "type": "dissipation_check",
        "t": t,
        "controller": controller,
        "dH_dt": dH_dt,
        "bound": bound,
        "margin": margin,
        "identity_error": identity_error,
    }
    emit_event(ev)
    return ev


def emit_information_audit(controller: str, vehicle: int, permitted: bool, violations: int) -> Dict[str, Any]:
    ev = {
        "type": "information_audit",
        "controller": controller,
        "vehicle": vehicle,
        "permitted": permitted,
        "violations": violations,
    }
    emit_event(ev)
    return ev

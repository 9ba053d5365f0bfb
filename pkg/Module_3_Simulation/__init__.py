"""
Module_3_Simulation package initializer.
"""
__all__ = [
    "events",
    "scenario",
    "sampler",
    "metrics",
    "runner",
    "outputs",
    "sweep",
    "verification",
]

"""
Module_1_Ring_Model package initializer.
"""
__all__ = [
    "utils",
    "events",
    "ring_geometry",
    "potentials",
    "dynamics",
]

"""
Module_2_Cruise_Controllers package initializer.
"""
__all__ = [
    "events",
    "controllers",
    "clf",
]

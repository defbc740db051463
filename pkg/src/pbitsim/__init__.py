"""Simulator for networks of low-barrier-magnet p-bits under device variability."""
__version__ = "0.1.0"

"""Dynamically corrected gates from shaped decoupling pulses on Ising networks."""

__version__ = "0.1.0"

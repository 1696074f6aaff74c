"""Simulation and hypothesis tests for exceedances of generalized Pareto processes."""

__version__ = "0.1.0"

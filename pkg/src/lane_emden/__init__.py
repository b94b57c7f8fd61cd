"""Numerical Lyapunov-Schmidt toolkit for the critical Lane-Emden system."""

__version__ = "0.1.0"

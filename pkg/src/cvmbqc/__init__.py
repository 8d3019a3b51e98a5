"""Gate noise and GKP error analysis for measurement-based computation on
2D continuous-variable cluster states."""

__version__ = "0.1.0"

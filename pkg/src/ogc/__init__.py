"""Online gradient control for bi-level real-time control with time-varying feasible sets."""

__version__ = "0.1.0"

"""Component-based surrogate for 2D indoor velocity and temperature fields."""

__version__ = "0.1.0"

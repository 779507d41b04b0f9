"""Fixed-point machinery for the equations of motion of the quartic scalar field in 4-d."""

__version__ = "0.1.0"

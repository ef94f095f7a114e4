"""Human-in-the-loop supervisory control built on gain-modulated decision models."""

__version__ = "0.1.0"

"""Exact and simulated success probabilities for a two-space bit-transmission scheme."""

__version__ = "0.1.0"

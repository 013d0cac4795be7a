"""Merge-over-all-paths analysis of sound deterministic negotiation diagrams."""

from .core import Configuration, Diagram, Location, validate

__all__ = ["Configuration", "Diagram", "Location", "validate"]
__version__ = "0.1.0"

"""Diagram text format, DOT export and result reports."""

from .dot import emit_dot
from .parser import load, parse, render

__all__ = ["emit_dot", "load", "parse", "render"]

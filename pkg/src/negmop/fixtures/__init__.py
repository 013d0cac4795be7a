"""Diagrams transcribed from the figures, shipped as package data."""

from importlib import resources

from ..core import Diagram
from ..io.parser import parse

NAMES = ("fig1", "fig2", "fig4")


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.neg").read_text(encoding="utf-8")


def load_fixture(name: str) -> Diagram:
    return parse(source(name))


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.neg")

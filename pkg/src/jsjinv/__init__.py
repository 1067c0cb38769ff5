"""Quasi-isometry and boundary invariants from quotient graphs of cylinders."""

from .classify import Verdict, Workspace, analyze, compare, full_refine, orbits
from .model import CylinderGraph, load, parse_input, subdivide
from .ornaments import INF, ExtNat

__all__ = [
    "CylinderGraph",
    "ExtNat",
    "INF",
    "Verdict",
    "Workspace",
    "analyze",
    "compare",
    "full_refine",
    "load",
    "orbits",
    "parse_input",
    "subdivide",
]
__version__ = "0.1.0"

"""Branched ideal triangulations of closed surfaces and their move calculus."""
from .complex_core import (
    SurfaceClass,
    Triangulation,
    build,
    canonical_key,
    classify_surface,
    find_nutshells,
    find_triangular_stars,
    trapped_edges,
)
from .branching import Branching, enumerate_branchings, is_branching

__all__ = [
    "Branching",
    "SurfaceClass",
    "Triangulation",
    "build",
    "canonical_key",
    "classify_surface",
    "enumerate_branchings",
    "find_nutshells",
    "find_triangular_stars",
    "is_branching",
    "trapped_edges",
]

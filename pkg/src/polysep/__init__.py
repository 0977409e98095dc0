"""Separatrix structure and multiplicity-preserving bifurcations of
complex polynomial vector fields z' = P(z).

Pipeline: roots -> build_graph -> decompose -> invariants -> enumerate_rank1
-> realize/verify.  All objects are immutable after construction and all
operations are pure functions of their inputs, so values can be shared
freely between threads.
"""

from .polynomial import (
    CENTER,
    MULTIPLE,
    SINK,
    SOURCE,
    EquilibriumPoint,
    Polynomial,
    classify,
    from_roots,
    roots,
)
from .tracing import SeparatrixGraph, SeparatrixTrace, TraceConfig, build_graph, trace

__all__ = [
    "Polynomial",
    "EquilibriumPoint",
    "roots",
    "classify",
    "from_roots",
    "SINK",
    "SOURCE",
    "CENTER",
    "MULTIPLE",
    "TraceConfig",
    "SeparatrixTrace",
    "SeparatrixGraph",
    "trace",
    "build_graph",
]

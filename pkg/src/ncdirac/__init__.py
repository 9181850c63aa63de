"""Verification toolkit for a planar Dirac system in time-dependent
noncommutative phase-space: exact operator algebra, invariant construction,
envelope/phase closed forms, and truncated-basis evolution."""

__version__ = "0.1.0"

"""Generic symmetry defect sets (Wigner caustics) of pairs of plane curves."""

__version__ = "0.1.0"

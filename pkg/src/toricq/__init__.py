"""Numerics for half-form corrected quantization of toric Kahler manifolds
along Mabuchi geodesic rays."""

__version__ = "0.1.0"

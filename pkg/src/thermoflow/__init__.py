"""Linear stability, center-manifold reduction and spectral simulation of
thermally forced two-dimensional primitive equations."""

__version__ = "0.1.0"

"""Inverse scattering on the hexagonal lattice: forward kernels and layer-stripping reconstruction."""

__version__ = "0.1.0"

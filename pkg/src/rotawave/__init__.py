"""Rotation and lifting factorizations of wavelet transforms."""

__version__ = "0.1.0"

"""Numerics for multi-spike patterns in a Gierer-Meinhardt model with a spatial precursor term."""

__version__ = "0.1.0"

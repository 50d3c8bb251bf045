"""Quantum-reference-frame transformations for relativistic spin-1/2 wavepackets."""

__version__ = "0.1.0"

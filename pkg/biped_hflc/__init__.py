"""Hierarchical neuro-fuzzy controller for a planar biped robot."""

__version__ = "0.1.0"

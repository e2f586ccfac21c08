"""Optical multistability of a cavity coupled to multi-level atoms."""

__version__ = "0.1.0"

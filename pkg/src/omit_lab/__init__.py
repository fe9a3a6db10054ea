"""Optical response of a two-resonator optomechanical cavity with a driven mechanical mode."""

__version__ = "0.1.0"

"""Interaction-variable modelling and control of electric energy systems."""

__version__ = "0.1.0"

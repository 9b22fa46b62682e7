"""Inhomogeneous exponential last-passage percolation: shapes, Busemann
functions, geodesics, competition interfaces and the coupled particle
systems."""
from .environment import Environment, homogeneous
from .errors import ConfigError

__all__ = ["Environment", "homogeneous", "ConfigError"]

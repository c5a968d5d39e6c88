"""Generalised probabilistic theories as polyhedral cones, CHSH optimisation
and bounds for the adaptive CHSH game."""

__version__ = "0.1.0"

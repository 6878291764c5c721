"""Spiking actor / deep critic reinforcement learning for mapless robot navigation."""

__version__ = "0.1.0"

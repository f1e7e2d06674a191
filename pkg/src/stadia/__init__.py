"""Bounding-box stadiametric ranging, avoidance/tracking guidance and a desk SITL loop."""

__version__ = "0.1.0"

"""Exact tools for periodic billiards in triangle tilings and fully flipped circle exchanges."""

__version__ = "0.1.0"

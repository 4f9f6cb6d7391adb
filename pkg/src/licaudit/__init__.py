"""Detect Java project and dependency licenses, find incompatibilities, suggest a license."""

__version__ = "0.1.0"

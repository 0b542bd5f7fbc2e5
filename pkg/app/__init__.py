"""Medial skeletons from a set cover of dilated inner balls."""

__version__ = "0.1.0"
__all__ = ["__version__"]

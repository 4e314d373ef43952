"""cglab: spectral laboratory for the complete-graph random operator."""

__version__ = "0.1.0"

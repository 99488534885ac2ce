"""Data-adapted quantum kernels for SVMs via compositional circuit search."""
__version__ = "0.1.0"

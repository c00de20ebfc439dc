"""Classification of three-dimensional Hom-Lie structures over the complex numbers."""

__version__ = "0.1.0"

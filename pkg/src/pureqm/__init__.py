"""Born-rule frequencies from unitary measurement models, by the method of types."""

__version__ = "0.1.0"

"""Classification toolkit for the cyclically presented groups G_n(m,k)."""

from .presentations import CyclicPresentation, FibTypeParams, GeneralPresentation, Word, make_fib_presentation

__version__ = "0.1.0"

__all__ = ["CyclicPresentation", "FibTypeParams", "GeneralPresentation", "Word", "make_fib_presentation"]

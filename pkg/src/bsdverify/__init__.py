"""Numerical verification of plurisubharmonic exhaustions on pairs of
bounded symmetric domains."""

__version__ = "0.1.0"

from .domains import DomainSpec, Kind  # noqa: E402
from .octonion import H3Matrix, Octonion  # noqa: E402

__all__ = ["DomainSpec", "Kind", "H3Matrix", "Octonion", "__version__"]

"""softlorentz: event-driven soft Lorentz gas / pulsed & kicked rotor toolkit."""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]

"""Missed-approach reinjection simulator: Dubins guidance, BADA3-style fuel and an arrival-flow engine."""
from arsim._jit import HAVE_NUMBA, NUMBA_DISABLED

__version__ = "0.1.0"

__all__ = ["HAVE_NUMBA", "NUMBA_DISABLED", "__version__"]

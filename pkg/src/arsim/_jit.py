"""Optional numba acceleration.

Set ``ARSIM_DISABLE_NUMBA=1`` to run every kernel as plain Python; the
kernels are written so both paths produce the same numbers.
"""
import logging
import os

logger = logging.getLogger(__name__)

NUMBA_DISABLED = os.environ.get("ARSIM_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

if not NUMBA_DISABLED:
    try:
        import numba

        def njit(*args, **kwargs):
            kwargs.setdefault("cache", True)
            return numba.njit(*args, **kwargs)

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        logger.warning("numba not importable, falling back to pure Python kernels")
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if not HAVE_NUMBA:

    def njit(pyfunc=None, **kwargs):
        """Null decorator used when numba is disabled."""

        def wrap(func):
            return func

        return wrap if pyfunc is None else wrap(pyfunc)


__all__ = ["njit", "HAVE_NUMBA", "NUMBA_DISABLED"]

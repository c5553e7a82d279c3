"""Kernel backend selection.

The compiled Cython core is used when importable; otherwise the pure-Python
reference takes over.  Set SOFTLORENTZ_PURE=1 to force the fallback (used by
the parity tests and the benchmark).
"""

import os

from . import _pure as pure

if os.environ.get("SOFTLORENTZ_PURE") == "1":
    active = pure
    BACKEND = "pure"
else:
    try:
        from . import _core as active  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        active = pure
        BACKEND = "pure"

# ids shared by both backends
PROFILE_ZERO = pure.PROFILE_ZERO
PROFILE_CONST = pure.PROFILE_CONST
PROFILE_COS = pure.PROFILE_COS
PROFILE_QUASI = pure.PROFILE_QUASI
PHASE_GLOBAL = pure.PHASE_GLOBAL
PHASE_PER_SCATTERER = pure.PHASE_PER_SCATTERER
STATUS_OK = pure.STATUS_OK
STATUS_STALLED = pure.STATUS_STALLED
STATUS_TRAPPED = pure.STATUS_TRAPPED
STATUS_NO_HIT = pure.STATUS_NO_HIT
STATUS_DEGENERATE = pure.STATUS_DEGENERATE

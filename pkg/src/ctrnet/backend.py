"""Numeric backend selection for the hot per-instance kernels.

Every kernel has two implementations: an explicit-loop version compiled
with numba and a vectorized pure-numpy version. The CTRNET_BACKEND
environment variable picks one:

    auto    numba when importable, numpy otherwise (default)
    numba   require numba; fail at import if it is missing
    numpy   force the pure-numpy path
"""

import os

_requested = os.environ.get("CTRNET_BACKEND", "auto").strip().lower()

if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"CTRNET_BACKEND must be one of auto, numba, numpy; got {_requested!r}"
    )

if _requested == "numpy":
    ACTIVE_BACKEND = "numpy"
else:
    try:
        import numba  # noqa: F401

        ACTIVE_BACKEND = "numba"
    except ImportError as exc:
        if _requested == "numba":
            raise RuntimeError(
                "CTRNET_BACKEND=numba but numba is not importable"
            ) from exc
        ACTIVE_BACKEND = "numpy"

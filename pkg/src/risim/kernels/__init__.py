"""Backend selection for the Monte Carlo hot path.

The compiled kernel is preferred when present; RIS_IM_BACKEND=numpy or
=cython forces a choice (the latter raises if the extension is missing).
"""

import os

from . import reference

_FORCED = os.environ.get("RIS_IM_BACKEND", "auto").lower()

if _FORCED not in ("auto", "cython", "numpy"):
    raise RuntimeError(f"RIS_IM_BACKEND must be auto, cython or numpy, got {_FORCED!r}")

if _FORCED == "numpy":
    active = reference
else:
    try:
        from . import _speedups as active
    except ImportError:
        if _FORCED == "cython":
            raise RuntimeError("RIS_IM_BACKEND=cython but the compiled kernel is absent")
        active = reference


def get_backend(name=None):
    """Resolve a backend module by name, defaulting to the import-time pick."""
    if name in (None, "auto"):
        return active
    if name == "numpy":
        return reference
    if name == "cython":
        from . import _speedups

        return _speedups
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["numpy"]
    try:
        from . import _speedups  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    return names

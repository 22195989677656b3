"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; set the
environment variable ``COINWALK_BACKEND=python`` (or ``cython``) to force
a choice before import, or call :func:`select` afterwards.
"""

from __future__ import annotations

import os

from . import _kernels_py

kernels = _kernels_py
name = "python"

_FORCED = os.environ.get("COINWALK_BACKEND", "").strip().lower()


def available() -> list[str]:
    out = ["python"]
    try:
        from . import _kernels_cy  # noqa: F401

        out.append("cython")
    except ImportError:
        pass
    return out


def select(backend: str) -> str:
    """Switch kernels; returns the active backend name."""
    global kernels, name
    backend = backend.lower()
    if backend == "python":
        kernels = _kernels_py
        name = "python"
    elif backend == "cython":
        from . import _kernels_cy

        kernels = _kernels_cy
        name = "cython"
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return name


if _FORCED:
    select(_FORCED)
else:
    try:
        select("cython")
    except ImportError:
        pass

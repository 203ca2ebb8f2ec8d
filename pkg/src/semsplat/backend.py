"""Backend selection for the hot kernels.

Set SEMSPLAT_BACKEND=numpy to force the pure-numpy fallback; the default
(auto) uses numba when it imports cleanly. Individual entry points also accept
an explicit backend argument, which the benchmark uses to compare both paths.
"""
from __future__ import annotations

import os

_VALID = ("auto", "numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except Exception:
        return False
    return True


def resolve_backend(backend: str | None = None) -> str:
    """Resolve an explicit or environment-selected backend to numba|numpy."""
    choice = backend or os.environ.get("SEMSPLAT_BACKEND", "auto")
    if choice not in _VALID:
        raise ValueError(f"unknown backend {choice!r}, expected one of {_VALID}")
    if choice == "auto":
        return "numba" if _numba_available() else "numpy"
    if choice == "numba" and not _numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    return choice

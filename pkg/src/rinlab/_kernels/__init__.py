"""Kernel backend selection.

The compiled extension (``_ckern``) is used when it imported successfully;
otherwise the numpy/scipy fallback (``pure``). ``RINLAB_KERNELS=python`` (or
``c``) in the environment forces a backend for the whole process; individual
callers can also request one explicitly via :func:`get_backend`.
"""
from __future__ import annotations

import os

from . import pure

try:
    from . import _ckern

    _HAVE_COMPILED = True
except ImportError:
    _ckern = None
    _HAVE_COMPILED = False

_ALIASES = {"c": "c", "compiled": "c", "python": "python", "pure": "python"}


def available_backends() -> tuple[str, ...]:
    return ("c", "python") if _HAVE_COMPILED else ("python",)


def default_backend() -> str:
    forced = os.environ.get("RINLAB_KERNELS", "").strip().lower()
    if forced:
        return _ALIASES.get(forced, forced)
    return "c" if _HAVE_COMPILED else "python"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: env/compiled preference)."""
    name = _ALIASES.get((name or default_backend()).lower())
    if name == "c":
        if not _HAVE_COMPILED:
            raise RuntimeError("compiled kernels requested but the extension is not built")
        return _ckern
    if name == "python":
        return pure
    raise ValueError(f"unknown kernel backend {name!r}")

"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports. Setting
``CVFSCREEN_BACKEND=python`` forces the pure-Python fallback.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _select() -> tuple[ModuleType, str]:
    if os.environ.get("CVFSCREEN_BACKEND", "").lower() == "python":
        return _pykernels, "python"
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        return _pykernels, "python"
    return _ckernels, "cython"


kernels, BACKEND = _select()


def get_kernels(name: str | None = None) -> ModuleType:
    """Return a specific backend by name, or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels  # type: ignore[attr-defined]
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")

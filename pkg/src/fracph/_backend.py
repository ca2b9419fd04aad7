"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module.  Setting ``FRACPH_PURE_PYTHON=1`` forces
the fallback.
"""

import importlib
import os

__all__ = ["BACKEND", "simulate_rewards", "load_backend", "available_backends"]


def load_backend(name: str):
    """Import a backend module by name (``"cython"`` or ``"python"``)."""
    module = {"cython": "fracph._kernels", "python": "fracph._pykernels"}[name]
    return importlib.import_module(module)


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def _select():
    if os.environ.get("FRACPH_PURE_PYTHON", "").strip() not in ("", "0"):
        return load_backend("python")
    try:
        return load_backend("cython")
    except ImportError:
        return load_backend("python")


_module = _select()
BACKEND = _module.BACKEND
simulate_rewards = _module.simulate_rewards

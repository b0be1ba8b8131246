"""Backend selection for the tree kernels.

The compiled extension is used when it imports; otherwise, or when
``GDPAUDIT_PURE_PYTHON`` is set, the numpy fallback is used.
"""

from __future__ import annotations

import importlib
import os

from . import _kernels_py


def load_backend(name: str):
    if name == "python":
        return _kernels_py
    if name == "cython":
        return importlib.import_module("gdpaudit._ckernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def _default():
    if os.environ.get("GDPAUDIT_PURE_PYTHON"):
        return _kernels_py, "python"
    try:
        return load_backend("cython"), "cython"
    except ImportError:
        return _kernels_py, "python"


backend, BACKEND = _default()
find_splits = backend.find_splits
predict_forest = backend.predict_forest

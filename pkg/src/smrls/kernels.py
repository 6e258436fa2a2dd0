"""Backend selection for the per-sample kernels.

The compiled extension is preferred; the numpy implementation in
:mod:`smrls._pykernels` is used when the extension is missing or when the
environment variable ``SMRLS_PURE_PYTHON`` is set to a non-empty value other
than ``0``.
"""
import importlib
import os

from smrls import _pykernels

_FORCE_PY = os.environ.get("SMRLS_PURE_PYTHON", "") not in ("", "0")

compiled = None
if not _FORCE_PY:
    try:
        compiled = importlib.import_module("smrls._kernels")
    except ImportError:
        compiled = None

python = _pykernels
active = compiled if compiled is not None else python
BACKEND = "compiled" if compiled is not None else "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python') or the active one."""
    if name is None:
        return active
    if name == "python":
        return python
    if name == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        return compiled
    raise ValueError(f"unknown kernel backend {name!r}")

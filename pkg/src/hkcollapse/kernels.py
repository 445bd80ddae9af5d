"""Backend selection for the hot lattice kernel.

The compiled Cython module is used when it imports; otherwise the numpy
fallback. Setting ``HKCOLLAPSE_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _lattice_py

BACKEND = "python"
lattice_moments = _lattice_py.lattice_moments

if os.environ.get("HKCOLLAPSE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _lattice as _compiled
    except ImportError:
        pass
    else:
        lattice_moments = _compiled.lattice_moments
        BACKEND = "cython"

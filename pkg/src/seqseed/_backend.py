"""Select the compiled kernels when available, else the pure-Python ones.

Set ``SEQSEED_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("SEQSEED_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:  # extension not built
        kernels = _pykernels

COMPILED = kernels is not _pykernels
NAME = "cython" if COMPILED else "python"


def available():
    """All importable kernel modules, keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out

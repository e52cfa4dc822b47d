"""Select the kernel implementation once, at import.

``CRUC_BACKEND=python`` forces the numpy fallback; ``CRUC_BACKEND=cython``
makes a missing extension an import error instead of a silent fallback.
"""

import os

from . import _fallback

_requested = os.environ.get("CRUC_BACKEND", "auto").lower()

if _requested == "python":
    _impl = _fallback
    NAME = "python"
else:
    try:
        from . import _kernels as _impl

        NAME = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _fallback
        NAME = "python"

topk_pcc = _impl.topk_pcc
predict_components = _impl.predict_components


def implementations() -> dict:
    """All importable kernel modules by name (for cross-checks and benchmarks)."""
    out = {"python": _fallback}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out

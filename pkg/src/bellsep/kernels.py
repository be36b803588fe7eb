"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; otherwise the
numpy fallback in ``_kernels_py`` is loaded. Set ``BELLSEP_PURE_PYTHON=1`` to
force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("BELLSEP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

walsh_max = _impl.walsh_max
mc_count_positive = _impl.mc_count_positive
stream_key = _impl.stream_key
uniforms = _impl.uniforms

__all__ = ["BACKEND", "walsh_max", "mc_count_positive", "stream_key", "uniforms"]

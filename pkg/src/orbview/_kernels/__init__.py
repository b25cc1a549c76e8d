"""Hot remap kernels: compiled lane with a pure-numpy fallback.

The compiled extension is preferred when it imported cleanly; setting the
environment variable ORBVIEW_FORCE_NUMPY=1 before import forces the numpy
lane (used for benchmarking and lane-parity testing). BACKEND names the
lane in use.
"""

import os
import warnings

if os.environ.get("ORBVIEW_FORCE_NUMPY"):
    from . import _remap_np as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _remap_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError as exc:
        warnings.warn(
            f"compiled remap kernels unavailable ({exc}); "
            "falling back to the numpy lane"
        )
        from . import _remap_np as _impl

        BACKEND = "numpy"

project_to_source = _impl.project_to_source
resample_bilinear = _impl.resample_bilinear

__all__ = ["BACKEND", "project_to_source", "resample_bilinear"]

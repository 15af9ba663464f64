"""Kernel backend selection.

The hot solver loops (power iteration, stationarity grid scans, Newton
refinement, projection iterations) have two interchangeable backends:

* numba-compiled loops (default when numba is importable), and
* a vectorized pure-numpy fallback.

Set SETENSOR_DISABLE_NUMBA=1 to force the numpy path.  Both backends are
exercised by the test suite and compared by benchmarks/bench_kernels.py.
"""

from __future__ import annotations

import os


def _numba_disabled() -> bool:
    return os.environ.get("SETENSOR_DISABLE_NUMBA", "").strip().lower() in (
        "1",
        "true",
        "yes",
        "on",
    )


if _numba_disabled():
    from . import _kernels_np as _impl
else:
    try:
        from . import _kernels_nb as _impl
    except ImportError:  # numba not installed
        from . import _kernels_np as _impl

BACKEND = _impl.BACKEND_NAME

biquadratic_batch = _impl.biquadratic_batch
kkt_residual_grid = _impl.kkt_residual_grid
wqz_power = _impl.wqz_power
newton_refine_batch = _impl.newton_refine_batch
pocs_run = _impl.pocs_run

"""Backend selection for the hot kernels.

``ORTHOFIELD_BACKEND=numpy`` forces the pure-numpy path; anything else (or
unset) uses numba when it imports cleanly.
"""

import logging
import os

log = logging.getLogger(__name__)

_requested = os.environ.get("ORTHOFIELD_BACKEND", "numba").strip().lower()

if _requested == "numpy":
    from . import _kernels_numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        log.warning("numba unavailable, falling back to numpy kernels")
        from . import _kernels_numpy as _impl

        BACKEND = "numpy"

jv_array = _impl.jv_array
bessel_table = _impl.bessel_table
exp_cov_matrix = _impl.exp_cov_matrix
exp_cov_symmetric = _impl.exp_cov_symmetric
hankel_matrix = _impl.hankel_matrix

"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import from ``SELFAFFINE_BACKEND``
(``numba`` or ``numpy``).  The default is numba when it imports.
"""
import os
import warnings

from . import _numpy

warnings.filterwarnings("ignore", message=".*TBB.*")

_requested = os.environ.get("SELFAFFINE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"SELFAFFINE_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

_impl = _numpy
BACKEND = "numpy"
if _requested == "numba":
    try:
        from . import _numba as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - exercised only without numba
        _impl = _numpy

geometric_product = _impl.geometric_product
empirical_cf = _impl.empirical_cf
series_points = _impl.series_points
good_counts = _impl.good_counts
max_good_count_1d = _impl.max_good_count_1d


def set_threads(n):
    """Cap kernel parallelism; results are identical for every setting."""
    if BACKEND != "numba" or n is None:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def backend_module(name):
    """The kernel module for ``name``; used by benchmarks and equivalence tests."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba
        return _numba
    raise ValueError(f"unknown backend {name!r}")

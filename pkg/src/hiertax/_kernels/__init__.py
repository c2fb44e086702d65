"""Numeric kernels with an optional compiled fast path.

The compiled extension (built with ``python setup.py build_ext --inplace``)
is picked automatically when importable; otherwise the numpy implementations
take over. Set ``HIERTAX_KERNELS=pure`` to force the fallback, e.g. when
benchmarking one against the other.
"""
import os

from . import _pure

if os.environ.get("HIERTAX_KERNELS", "").lower() == "pure":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

log_md_core = _impl.log_md_core
prefix_merge_deltas = _impl.prefix_merge_deltas
doc_cluster_scores = _impl.doc_cluster_scores


def backend() -> str:
    """Name of the active kernel backend: "native" or "pure"."""
    return BACKEND

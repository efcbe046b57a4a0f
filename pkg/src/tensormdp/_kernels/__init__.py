"""Hot computational kernels with two interchangeable backends.

``_native`` is a compiled Cython extension; ``_reference`` is a pure-Python
implementation of the same contract. The native backend is used when it is
importable unless ``TENSOR_MDP_PURE_PYTHON`` is set to a non-empty value
other than ``0``. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _reference

if os.environ.get("TENSOR_MDP_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _reference
    BACKEND = "reference"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _reference
        BACKEND = "reference"

weighted_outer3_sum = _impl.weighted_outer3_sum
gram_sum = _impl.gram_sum
sde_rollout = _impl.sde_rollout
tabular_rollout = _impl.tabular_rollout

__all__ = [
    "BACKEND",
    "weighted_outer3_sum",
    "gram_sum",
    "sde_rollout",
    "tabular_rollout",
]

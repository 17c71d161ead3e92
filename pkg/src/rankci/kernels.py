"""Kernel backend selection.

Imports the compiled extension ``rankci._kernels`` when it was built,
otherwise the pure-Python fallbacks in ``rankci._kernels_py``.  Setting
the environment variable ``RANKCI_PURE`` to a non-empty value forces the
fallback (useful for benchmarking and for debugging the kernels).

``BACKEND`` names the selected implementation: "compiled" or "pure".
"""

import os

if os.environ.get("RANKCI_PURE"):
    from . import _kernels_py as _impl

    BACKEND = "pure"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "pure"

AGG_SUM = _impl.AGG_SUM
AGG_MAX = _impl.AGG_MAX
masks_union = _impl.masks_union
min_contrib_fill = _impl.min_contrib_fill
ordered_partitions_union = _impl.ordered_partitions_union

"""Backend selection for the evaluation kernels.

The compiled extension is used when it imports; ``HOMSAT_PURE=1`` forces the
pure-Python implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("HOMSAT_PURE") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

eval_table = _impl.eval_table
first_model = _impl.first_model

OP_PROP, OP_TOP, OP_NOT, OP_OR, OP_B, OP_D, OP_A = range(7)

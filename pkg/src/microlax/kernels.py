"""Backend selection for the batch kernels.

The compiled extension ``microlax._kernels`` is used when it imports;
otherwise, or when ``MICROLAX_PURE_PYTHON=1`` is set, the numpy twin in
``microlax._kernels_py`` is used.  Both expose the same functions.
"""

from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("MICROLAX_PURE_PYTHON", "0") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "cython"
else:
    _compiled = None


def backends():
    """Available backend modules keyed by name."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


relaxed_batch = _impl.relaxed_batch
rank1_energies = _impl.rank1_energies
rank2_energies = _impl.rank2_energies
normal_map = _kernels_py.normal_map
rank2_leaves = _kernels_py.rank2_leaves

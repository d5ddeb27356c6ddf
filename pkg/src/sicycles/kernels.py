"""Kernel backend selection.

The compiled extension is used when importable; set ``SICYCLES_PURE=1`` to
force the pure-Python implementation.
"""

import os

from . import _pykernels as pure

compiled = None
if os.environ.get("SICYCLES_PURE") != "1":
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

backend = compiled if compiled is not None else pure
BACKEND = "compiled" if compiled is not None else "python"

karp_table = backend.karp_table
johnson_cycles = backend.johnson_cycles
johnson_profile = backend.johnson_profile
best_reorder = backend.best_reorder

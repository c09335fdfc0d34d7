"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``JULIATHERMO_PURE=1`` to
force the numpy fallback. ``BACKEND`` names the active choice.
"""

import os

from . import _pykernels

if os.environ.get("JULIATHERMO_PURE", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

series_terms = _impl.series_terms
mc_chains = _impl.mc_chains
newton_periodic = _impl.newton_periodic

__all__ = ["BACKEND", "series_terms", "mc_chains", "newton_periodic"]

"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module. Set ``PVAUDIT_PURE_PYTHON=1`` to force the fallback. Both backends
produce identical results, so the choice only affects speed.
"""

import os

from pvaudit import _pykernels

if os.environ.get("PVAUDIT_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from pvaudit import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"
    else:
        BACKEND = "cython"

mix64 = _impl.mix64
stream_key = _impl.stream_key
uniform_at = _impl.uniform_at
normal_quantile = _impl.normal_quantile
altman_bland_p = _impl.altman_bland_p
altman_bland_batch = _impl.altman_bland_batch
ks_statistic = _impl.ks_statistic
simulate_studies = _impl.simulate_studies


def available_backends():
    """Map backend name to kernel module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from pvaudit import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out

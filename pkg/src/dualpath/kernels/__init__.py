"""Hot numeric kernels with a compiled fast path and a numpy fallback.

The compiled extension is selected automatically when present; setting the
environment variable ``DUALPATH_PURE_PYTHON=1`` before import forces the
reference implementation.
"""

import os

from . import reference

if os.environ.get("DUALPATH_PURE_PYTHON", "0") not in ("", "0"):
    _impl = reference
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = reference

correction_sum = _impl.correction_sum
channel_power_sums = _impl.channel_power_sums
joint_power_sums = _impl.joint_power_sums


def backend():
    """Name of the active kernel backend: "compiled" or "python"."""
    return "python" if _impl is reference else "compiled"


__all__ = [
    "correction_sum",
    "channel_power_sums",
    "joint_power_sums",
    "backend",
    "reference",
]

"""Hot kernels with a compiled core and a pure-numpy fallback.

The compiled Cython module is preferred when it imported successfully;
setting SPEECH2ACT_PURE_KERNELS=1 forces the numpy fallback (useful for
benchmarking and for debugging suspected kernel issues).
"""

import os

from . import _pure

if os.environ.get("SPEECH2ACT_PURE_KERNELS", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = "pure" if _impl is _pure else "compiled"

lstm_gates_forward = _impl.lstm_gates_forward
lstm_gates_backward = _impl.lstm_gates_backward
edit_distance = _impl.edit_distance

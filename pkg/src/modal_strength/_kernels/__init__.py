"""Integrator kernel selection: compiled Cython core with numpy fallback.

``BACKEND`` reports which implementation was picked at import time.
``available_backends()`` lists both when the extension was built, so tests
and the benchmark can compare them.
"""
from . import fallback

try:
    from . import _rk4_cy as _compiled

    BACKEND = "cython"
    _active = _compiled
except ImportError:  # extension not built
    _compiled = None
    BACKEND = "python"
    _active = fallback

rk4_segments = _active.rk4_segments


def available_backends():
    """Mapping backend name -> rk4_segments implementation."""
    impls = {"python": fallback.rk4_segments}
    if _compiled is not None:
        impls["cython"] = _compiled.rk4_segments
    return impls

"""Batched local-matrix kernels: compiled core with a numpy fallback.

Set RTDARCY_PURE_PYTHON=1 to force the fallback (used by the benchmark
and by tests comparing the two backends).
"""

import os

from . import _pure

if os.environ.get("RTDARCY_PURE_PYTHON"):
    _impl = _pure
    backend = "pure"
else:
    try:
        from . import _core as _impl

        backend = "cython"
    except ImportError:  # extension not built
        _impl = _pure
        backend = "pure"


def local_mass(phi, wdet):
    """Local mass matrices: phi (nc, nq, nv, 2), wdet (nc, nq) -> (nc, nv, nv)."""
    return _impl.local_mass(phi, wdet)


def local_mixed(psi, dphi, wdet):
    """Local pressure/divergence coupling: psi (nc, nq, np), dphi (nc, nq, nv),
    wdet (nc, nq) -> (nc, np, nv)."""
    return _impl.local_mixed(psi, dphi, wdet)

"""Benchmark the compiled assembly kernels against the numpy fallback.

Run as a script; it times the batched local-matrix kernels on
realistically shaped inputs and prints the speedup. The pure backend is
reached through the private module so both can be timed in one process.
"""

import time

import numpy as np

from rtdarcy._kernels import _pure, backend

try:
    from rtdarcy._kernels import _core
except ImportError:
    _core = None


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"import-time backend: {backend}")
    if _core is None:
        print("compiled kernels unavailable; nothing to compare")
        return
    # shapes: (cells, quadrature points, velocity dofs) for RT_2 on quads
    for nc, nq, nv, npp in ((2048, 16, 24, 9), (8192, 9, 12, 4)):
        phi = rng.standard_normal((nc, nq, nv, 2))
        dphi = rng.standard_normal((nc, nq, nv))
        psi = rng.standard_normal((nq, npp))
        wdet = rng.random((nc, nq)) + 0.5
        ref_mass = _pure.local_mass(phi, wdet)
        ref_mixed = _pure.local_mixed(psi, dphi, wdet)
        assert np.allclose(_core.local_mass(phi, wdet), ref_mass)
        assert np.allclose(_core.local_mixed(psi, dphi, wdet), ref_mixed)
        t_pure = _time(_pure.local_mass, phi, wdet)
        t_core = _time(_core.local_mass, phi, wdet)
        print(f"local_mass  nc={nc:5d} nv={nv:2d}: pure {t_pure*1e3:7.2f} ms, "
              f"cython {t_core*1e3:7.2f} ms, speedup {t_pure / t_core:5.2f}x")
        t_pure = _time(_pure.local_mixed, psi, dphi, wdet)
        t_core = _time(_core.local_mixed, psi, dphi, wdet)
        print(f"local_mixed nc={nc:5d} np={npp:2d}: pure {t_pure*1e3:7.2f} ms, "
              f"cython {t_core*1e3:7.2f} ms, speedup {t_pure / t_core:5.2f}x")


if __name__ == "__main__":
    main()

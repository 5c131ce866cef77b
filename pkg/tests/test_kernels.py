"""Compiled and pure-python assembly kernels agree bit-for-tolerance."""

import numpy as np
import pytest

import rtdarcy
from rtdarcy._kernels import _pure, backend, local_mass, local_mixed

try:
    from rtdarcy._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="extension not built")


def _random_inputs(rng, nc=37, nq=9, nv=12, npr=4):
    phi = rng.standard_normal((nc, nq, nv, 2))
    dphi = rng.standard_normal((nc, nq, nv))
    psi_cell = rng.standard_normal((nc, nq, npr))
    psi_ref = rng.standard_normal((nq, npr))
    wdet = rng.uniform(0.1, 1.0, (nc, nq))
    return phi, dphi, psi_cell, psi_ref, wdet


def test_backend_reported():
    assert rtdarcy.kernel_backend in ("cython", "pure")
    assert rtdarcy.kernel_backend == backend


@needs_core
def test_local_mass_backends_agree():
    rng = np.random.default_rng(0)
    phi, _, _, _, wdet = _random_inputs(rng)
    a = _core.local_mass(phi, wdet)
    b = _pure.local_mass(phi, wdet)
    assert np.abs(a - b).max() < 1e-12 * max(1.0, np.abs(b).max())


@needs_core
@pytest.mark.parametrize("shared", [False, True])
def test_local_mixed_backends_agree(shared):
    rng = np.random.default_rng(1)
    _, dphi, psi_cell, psi_ref, wdet = _random_inputs(rng)
    psi = psi_ref if shared else psi_cell
    a = _core.local_mixed(psi, dphi, wdet)
    b = _pure.local_mixed(psi, dphi, wdet)
    assert a.shape == b.shape == (dphi.shape[0], psi.shape[-1], dphi.shape[2])
    assert np.abs(a - b).max() < 1e-12 * max(1.0, np.abs(b).max())


def test_dispatch_matches_selected_backend():
    rng = np.random.default_rng(2)
    phi, dphi, psi, _, wdet = _random_inputs(rng, nc=5, nq=4, nv=6, npr=3)
    impl = _core if (backend == "cython" and _core is not None) else _pure
    assert np.array_equal(local_mass(phi, wdet), impl.local_mass(phi, wdet))
    assert np.array_equal(local_mixed(psi, dphi, wdet),
                          impl.local_mixed(psi, dphi, wdet))


def test_mass_kernel_is_symmetric_psd():
    rng = np.random.default_rng(3)
    phi, _, _, _, wdet = _random_inputs(rng, nc=4, nq=25, nv=8)
    mats = local_mass(phi, wdet)
    assert np.abs(mats - mats.transpose(0, 2, 1)).max() < 1e-13
    for m in mats:
        assert np.linalg.eigvalsh(m).min() > -1e-12

"""Numpy implementations of the assembly kernels."""

import numpy as np


def local_mass(phi, wdet):
    return np.einsum("cqid,cqjd,cq->cij", phi, phi, wdet, optimize=True)


def local_mixed(psi, dphi, wdet):
    # psi broadcasts over cells when tabulated once on the reference cell
    psi = np.asarray(psi)
    if psi.ndim == 2:
        psi = np.broadcast_to(psi, (len(wdet),) + psi.shape)
    return np.einsum("cqp,cqv,cq->cpv", psi, dphi, wdet, optimize=True)

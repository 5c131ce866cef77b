# cython: language_level=3
"""Compiled assembly kernels (hot inner loops of the cell assembly)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def local_mass(double[:, :, :, ::1] phi, double[:, ::1] wdet):
    cdef Py_ssize_t nc = phi.shape[0], nq = phi.shape[1], nv = phi.shape[2]
    out_arr = np.zeros((nc, nv, nv))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t c, q, i, j
    cdef double w, vix, viy
    for c in range(nc):
        for q in range(nq):
            w = wdet[c, q]
            for i in range(nv):
                vix = phi[c, q, i, 0] * w
                viy = phi[c, q, i, 1] * w
                for j in range(i, nv):
                    out[c, i, j] += vix * phi[c, q, j, 0] + viy * phi[c, q, j, 1]
        for i in range(nv):
            for j in range(i + 1, nv):
                out[c, j, i] = out[c, i, j]
    return out_arr


def local_mixed(psi, double[:, :, ::1] dphi, double[:, ::1] wdet):
    cdef Py_ssize_t nc = dphi.shape[0], nq = dphi.shape[1], nv = dphi.shape[2]
    psi_arr = np.ascontiguousarray(psi, dtype=np.float64)
    cdef bint shared = psi_arr.ndim == 2
    if shared:
        psi_arr = psi_arr[None, :, :]
    cdef double[:, :, ::1] ps = psi_arr
    cdef Py_ssize_t npr = ps.shape[2]
    out_arr = np.zeros((nc, npr, nv))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t c, q, p, v, cp
    cdef double w
    for c in range(nc):
        cp = 0 if shared else c
        for q in range(nq):
            for p in range(npr):
                w = ps[cp, q, p] * wdet[c, q]
                for v in range(nv):
                    out[c, p, v] += w * dphi[c, q, v]
    return out_arr

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise patch-distance kernels.

Same contract as ``denoisekit._accel.numpy_impl``: given the (N, P)
patch matrix, produce squared-L2 or L1 distances either densely (all
pairs, exactly symmetric) or restricted to a precomputed CSR window
skeleton.
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport fabs

cnp.import_array()


def dense_distance(double[:, ::1] patches, int norm_code):
    cdef Py_ssize_t n = patches.shape[0]
    cdef Py_ssize_t p = patches.shape[1]
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, d
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            if norm_code == 0:
                for k in range(p):
                    d = patches[i, k] - patches[j, k]
                    acc += d * d
            else:
                for k in range(p):
                    acc += fabs(patches[i, k] - patches[j, k])
            out[i, j] = acc
            out[j, i] = acc
    return out_arr


def windowed_distance(
    double[:, ::1] patches,
    long long[::1] indptr,
    long long[::1] indices,
    int norm_code,
):
    cdef Py_ssize_t n = patches.shape[0]
    cdef Py_ssize_t p = patches.shape[1]
    cdef Py_ssize_t nnz = indices.shape[0]
    data_arr = np.empty(nnz, dtype=np.float64)
    cdef double[::1] data = data_arr
    cdef Py_ssize_t i, m, k, j
    cdef double acc, d
    for i in range(n):
        for m in range(indptr[i], indptr[i + 1]):
            j = <Py_ssize_t> indices[m]
            acc = 0.0
            if norm_code == 0:
                for k in range(p):
                    d = patches[i, k] - patches[j, k]
                    acc += d * d
            else:
                for k in range(p):
                    acc += fabs(patches[i, k] - patches[j, k])
            data[m] = acc
    return data_arr

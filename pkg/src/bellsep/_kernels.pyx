# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Must stay bit-compatible with ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t index) nogil:
    return <double>(_mix(key + (index + 1) * GOLDEN) >> 11) * (1.0 / 9007199254740992.0)


def stream_key(seed):
    return int(_mix((<uint64_t>seed) * GOLDEN + GOLDEN))


def uniforms(uint64_t key, uint64_t start, Py_ssize_t count):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef Py_ssize_t j
    for j in range(count):
        out[j] = _uniform(key, start + j)
    return out


def walsh_max(table):
    """Maximum and first argmax of the Walsh-Hadamard transform of ``table``."""
    cdef cnp.ndarray[int64_t, ndim=1] w = np.array(table, dtype=np.int64, copy=True)
    cdef Py_ssize_t size = w.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef int64_t a, b
    if size == 0 or (size & (size - 1)) != 0:
        raise ValueError("table length must be a power of two")
    with nogil:
        while h < size:
            i = 0
            while i < size:
                for j in range(i, i + h):
                    a = w[j]
                    b = w[j + h]
                    w[j] = a + b
                    w[j + h] = a - b
                i += 2 * h
            h *= 2
    cdef int64_t best = w[0]
    cdef Py_ssize_t arg = 0
    for i in range(1, size):
        if w[i] > best:
            best = w[i]
            arg = i
    return int(best), int(arg)


def mc_count_positive(cdf, thresholds, Py_ssize_t trials, seed):
    """Count trials whose product of per-party +-1 outcomes equals +1."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] th = np.ascontiguousarray(thresholds, dtype=np.float64)
    cdef Py_ssize_t m = c.shape[0]
    cdef Py_ssize_t n = th.shape[1]
    cdef uint64_t key = <uint64_t>stream_key(seed)
    cdef uint64_t stride = <uint64_t>(n + 1)
    cdef Py_ssize_t t, i, lam
    cdef uint64_t base
    cdef double u
    cdef int parity
    cdef Py_ssize_t positive = 0
    with nogil:
        for t in range(trials):
            base = (<uint64_t>t) * stride
            u = _uniform(key, base)
            lam = 0
            while lam < m - 1 and c[lam] <= u:
                lam += 1
            parity = 0
            for i in range(n):
                u = _uniform(key, base + 1 + i)
                if not (u < th[lam, i]):
                    parity ^= 1
            if parity == 0:
                positive += 1
    return int(positive)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path kernels; mirrors ``_pykernels`` draw for draw."""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport log, sin, pow, M_PI
from numpy.random cimport bitgen_t

BACKEND = "cython"


cdef inline double _uniform(bitgen_t* bg) noexcept nogil:
    cdef double u = bg.next_double(bg.state)
    while u == 0.0:
        u = bg.next_double(bg.state)
    return u


cdef inline Py_ssize_t _pick(const double[::1] cum, double u) noexcept nogil:
    cdef Py_ssize_t last = cum.shape[0] - 1
    cdef Py_ssize_t j
    for j in range(last):
        if u < cum[j]:
            return j
    return last


cdef inline double _sojourn(bitgen_t* bg, double rate, double alpha) noexcept nogil:
    cdef double w = -log(_uniform(bg)) / rate
    cdef double U, e, a, s
    if alpha == 1.0:
        return w
    U = M_PI * _uniform(bg)
    while sin(U) < 1e-300:
        U = M_PI * _uniform(bg)
    e = -log(_uniform(bg))
    a = (sin((1.0 - alpha) * U)
         * pow(sin(alpha * U), alpha / (1.0 - alpha))
         / pow(sin(U), 1.0 / (1.0 - alpha)))
    s = pow(a / e, (1.0 - alpha) / alpha)
    return pow(w, 1.0 / alpha) * s


def simulate_rewards(gen, cum_init, cum_jump, rates, rewards, double alpha, Py_ssize_t n_paths):
    """Accumulated rewards for ``n_paths`` paths; see ``_pykernels``."""
    cdef const double[::1] ci = np.ascontiguousarray(cum_init, dtype=np.float64)
    cdef const double[:, ::1] cj = np.ascontiguousarray(cum_jump, dtype=np.float64)
    cdef const double[::1] lam = np.ascontiguousarray(rates, dtype=np.float64)
    cdef const double[:, ::1] R = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef Py_ssize_t p = lam.shape[0]
    cdef Py_ssize_t n = R.shape[1]
    out_arr = np.zeros((n_paths, n), dtype=np.float64)
    first_arr = np.full(n_paths, -1, dtype=np.int64)
    cdef double[:, ::1] out = out_arr
    cdef long long[::1] first = first_arr
    cdef Py_ssize_t i, k, state
    cdef double x

    bitgen = gen.bit_generator
    capsule = bitgen.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    cdef bitgen_t* bg = <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")

    with bitgen.lock, nogil:
        for i in range(n_paths):
            state = _pick(ci, _uniform(bg))
            if state == p:
                continue
            first[i] = state
            while state != p:
                x = _sojourn(bg, lam[state], alpha)
                for k in range(n):
                    out[i, k] += x * R[state, k]
                state = _pick(cj[state], _uniform(bg))
    return out_arr, first_arr

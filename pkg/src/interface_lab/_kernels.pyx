#cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot Monte Carlo loops.

Draws come straight from each path's Philox bit generator through numpy's
C distributions API, so the values are bit-identical with the pure backend's
``Generator.standard_normal`` / ``Generator.random`` fills, and the stream
consumption layout (all normals, then all uniforms, then bridge uniforms)
matches too.  The step arithmetic mirrors ``_kernels_py`` expression for
expression; see that module's docstring for the sampling scheme.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, fabs, sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal,
    random_standard_uniform,
)

cnp.import_array()


cdef bitgen_t *_bitgen(object bit_generator) except NULL:
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")


cdef inline void _fill_draws(bitgen_t *rng, double *z, double *u, double *ub,
                             Py_ssize_t n, bint with_bridge) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(n):
        z[j] = random_standard_normal(rng)
    for j in range(n):
        u[j] = random_standard_uniform(rng)
    if with_bridge:
        for j in range(n):
            ub[j] = random_standard_uniform(rng)


cdef inline double _step(double x, double z, double u, double sqrt_dt,
                         double inv_dt, double alpha) noexcept nogil:
    cdef double w, xw, p, v, aw
    w = x + sqrt_dt * z
    xw = x * w
    if xw > 0.0:
        p = 1.0 - exp(-2.0 * xw * inv_dt)
        if u < p:
            return w
        v = (u - p) / (1.0 - p)
    else:
        v = u
    aw = fabs(w)
    if v < alpha:
        return aw
    return -aw


def simulate_path(stream, double x0, double alpha, double dt, Py_ssize_t n_steps):
    """One full trajectory: returns the n_steps+1 grid values."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.empty(n_steps)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.empty(n_steps)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_steps + 1)
    cdef double[::1] zv = z, uv = u, ov = out
    cdef bitgen_t *rng = _bitgen(stream)
    cdef double sqrt_dt = sqrt(dt), inv_dt = 1.0 / dt, x = x0
    cdef Py_ssize_t j
    with nogil:
        _fill_draws(rng, &zv[0], &uv[0], NULL, n_steps, 0)
        ov[0] = x
        for j in range(n_steps):
            x = _step(x, zv[j], uv[j], sqrt_dt, inv_dt, alpha)
            ov[j + 1] = x
    return out


def simulate_summaries(streams, double x0, double alpha, double dt,
                       Py_ssize_t n_steps):
    """Endpoints plus occupation tallies for a block of paths.

    Returns (x_end, occ_plus_interp, occ_plus_left); see the pure backend
    for the tally definitions.
    """
    cdef Py_ssize_t b = len(streams)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.empty(n_steps)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.empty(n_steps)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_end = np.empty(b)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] occ_interp = np.empty(b)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] occ_left = np.empty(b)
    cdef double[::1] zv = z, uv = u
    cdef double[::1] xe = x_end, oi = occ_interp, ol = occ_left
    cdef double sqrt_dt = sqrt(dt), inv_dt = 1.0 / dt
    cdef double x, x_new, acc_i, acc_l, denom, frac
    cdef bint sp, sn
    cdef bitgen_t *rng
    cdef Py_ssize_t i, j
    for i in range(b):
        rng = _bitgen(streams[i])
        with nogil:
            _fill_draws(rng, &zv[0], &uv[0], NULL, n_steps, 0)
            x = x0
            acc_i = 0.0
            acc_l = 0.0
            for j in range(n_steps):
                if x >= 0.0:
                    acc_l += dt
                x_new = _step(x, zv[j], uv[j], sqrt_dt, inv_dt, alpha)
                sp = x >= 0.0
                sn = x_new >= 0.0
                if sp and sn:
                    acc_i += dt
                elif sp != sn:
                    denom = fabs(x) + fabs(x_new)
                    frac = fabs(x) / denom
                    if sp:
                        acc_i += dt * frac
                    else:
                        acc_i += dt * (1.0 - frac)
                x = x_new
            xe[i] = x
            oi[i] = acc_i
            ol[i] = acc_l
    return x_end, occ_interp, occ_left


def simulate_fpt(streams, double x0, double x_target, double alpha, double dt,
                 Py_ssize_t n_steps, bint bridge):
    """First-passage times to x_target for a block of paths; NaN = censored."""
    cdef Py_ssize_t b = len(streams)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.empty(n_steps)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.empty(n_steps)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ub = np.empty(n_steps)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(b, np.nan)
    cdef double[::1] zv = z, uv = u, ubv = ub, tv = out
    cdef double sqrt_dt = sqrt(dt), inv_dt = 1.0 / dt, a = x_target
    cdef bint upward = a > x0
    cdef double x, x_new, prod, p_hit
    cdef bitgen_t *rng
    cdef Py_ssize_t i, j
    for i in range(b):
        rng = _bitgen(streams[i])
        with nogil:
            _fill_draws(rng, &zv[0], &uv[0], &ubv[0], n_steps, 1)
            x = x0
            for j in range(n_steps):
                x_new = _step(x, zv[j], uv[j], sqrt_dt, inv_dt, alpha)
                if (x_new >= a) if upward else (x_new <= a):
                    tv[i] = (j + 1) * dt
                    break
                if bridge:
                    prod = (x - a) * (x_new - a)
                    if prod > 0.0 and x * x_new > 0.0:
                        p_hit = exp(-2.0 * prod * inv_dt)
                        if ubv[j] < p_hit:
                            tv[i] = j * dt + 0.5 * dt
                            break
                x = x_new
    return out

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernel for dense linear systems x' = A x + b.

Hot loop of the direct time-domain oracle: up to a few hundred thousand
fixed steps of a small dense system. Semantics must stay in lockstep with
``modal_strength._kernels.fallback``.
"""
import numpy as np


def rk4_segments(double[:, ::1] a, double[::1] x0, double[:, ::1] b_segs,
                 long[::1] seg_steps, double dt, long record_stride,
                 double clip, double[:, ::1] out):
    """Integrate over piecewise-constant input segments, recording states.

    out[r] receives the state after r*record_stride steps (out[0] = x0).
    Returns (n_records_written, truncated_step); truncated_step is the
    1-based global step at which any |state| first exceeded clip, or -1.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t nseg = b_segs.shape[0]
    cdef Py_ssize_t seg, step, i, j, rec
    cdef long gstep = 0
    cdef double acc, h2, h6, amax
    cdef double[::1] x = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] k1 = np.empty(n)
    cdef double[::1] k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n)
    cdef double[::1] xt = np.empty(n)

    h2 = dt / 2.0
    h6 = dt / 6.0
    for i in range(n):
        out[0, i] = x[i]
    rec = 1

    for seg in range(nseg):
        for step in range(seg_steps[seg]):
            for i in range(n):
                acc = b_segs[seg, i]
                for j in range(n):
                    acc += a[i, j] * x[j]
                k1[i] = acc
            for i in range(n):
                xt[i] = x[i] + h2 * k1[i]
            for i in range(n):
                acc = b_segs[seg, i]
                for j in range(n):
                    acc += a[i, j] * xt[j]
                k2[i] = acc
            for i in range(n):
                xt[i] = x[i] + h2 * k2[i]
            for i in range(n):
                acc = b_segs[seg, i]
                for j in range(n):
                    acc += a[i, j] * xt[j]
                k3[i] = acc
            for i in range(n):
                xt[i] = x[i] + dt * k3[i]
            for i in range(n):
                acc = b_segs[seg, i]
                for j in range(n):
                    acc += a[i, j] * xt[j]
                k4[i] = acc
            for i in range(n):
                x[i] = x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            gstep += 1
            amax = 0.0
            for i in range(n):
                if x[i] > amax:
                    amax = x[i]
                elif -x[i] > amax:
                    amax = -x[i]
            if amax > clip:
                return rec, gstep
            if gstep % record_stride == 0:
                for i in range(n):
                    out[rec, i] = x[i]
                rec += 1
    return rec, -1

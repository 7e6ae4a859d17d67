# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled co-simulation kernel; semantic twin of ``_kernel_py.run_loop``."""

import numpy as np

cimport cython
from libc.math cimport fabs


def run_loop(double[:, ::1] phi_p, double[::1] gam_pb, double[::1] c_p,
             double[:, ::1] phi_o, double[::1] gam_ob, double[::1] gam_ol,
             double[::1] k_row, double inv_b0, double k1, double[::1] kr,
             bint eadrc, double[:, ::1] rmat, double[::1] noise,
             double dist_amp, long dist_start, long delay_steps, double y_abort,
             double[::1] r_out, double[::1] y_out, double[::1] u_out,
             double[::1] e_out, double[:, ::1] xo_out):
    """Run the closed loop; returns the divergence sample index or -1."""
    cdef Py_ssize_t n_samples = r_out.shape[0]
    cdef Py_ssize_t mp = phi_p.shape[0]
    cdef Py_ssize_t mo = phi_o.shape[0]
    cdef Py_ssize_t n_kr = kr.shape[0]
    cdef Py_ssize_t k, i, j, idx

    xp_arr = np.zeros(mp)
    xo_arr = np.zeros(mo)
    tp_arr = np.zeros(mp)
    to_arr = np.zeros(mo)
    buf_arr = np.zeros(max(delay_steps, 1))
    cdef double[::1] xp = xp_arr
    cdef double[::1] xo = xo_arr
    cdef double[::1] tp = tp_arr
    cdef double[::1] to = to_arr
    cdef double[::1] buf = buf_arr

    cdef double y, ym, r, u, inj, ud, v, acc

    for k in range(n_samples):
        y = 0.0
        for i in range(mp):
            y += c_p[i] * xp[i]
        ym = y + noise[k]
        r = rmat[k, 0]
        if eadrc:
            acc = 0.0
            for i in range(mo):
                acc += k_row[i] * xo[i]
            u = inv_b0 * acc
            inj = r - ym
        else:
            acc = k1 * r
            for i in range(n_kr):
                acc += kr[i] * rmat[k, 1 + i]
            for i in range(mo):
                acc -= k_row[i] * xo[i]
            u = inv_b0 * acc
            inj = ym
        r_out[k] = r
        y_out[k] = y
        u_out[k] = u
        e_out[k] = r - y
        for i in range(mo):
            xo_out[k, i] = xo[i]
        if fabs(y) > y_abort:
            return k
        if k == n_samples - 1:
            break
        if delay_steps > 0:
            idx = k % delay_steps
            ud = buf[idx]
            buf[idx] = u
        else:
            ud = u
        v = ud + (dist_amp if k >= dist_start else 0.0)
        for i in range(mp):
            acc = gam_pb[i] * v
            for j in range(mp):
                acc += phi_p[i, j] * xp[j]
            tp[i] = acc
        for i in range(mp):
            xp[i] = tp[i]
        for i in range(mo):
            acc = gam_ob[i] * u + gam_ol[i] * inj
            for j in range(mo):
                acc += phi_o[i, j] * xo[j]
            to[i] = acc
        for i in range(mo):
            xo[i] = to[i]
    return -1

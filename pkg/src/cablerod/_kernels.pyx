# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt

cnp.import_array()


cdef inline void _rhs(double s, double th, double om, double L, double EI,
                      double qx, double qy, double* k) noexcept nogil:
    cdef double lever = L - s
    cdef double c = cos(th), sn = sin(th)
    k[0] = om
    k[1] = (-qx * lever * sn + qy * lever * c) / EI
    k[2] = c
    k[3] = sn


cdef void _step(double s, double h, double* st, double L, double EI,
                double qx, double qy) noexcept nogil:
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    _rhs(s, st[0], st[1], L, EI, qx, qy, k1)
    _rhs(s + 0.5 * h, st[0] + 0.5 * h * k1[0], st[1] + 0.5 * h * k1[1], L, EI, qx, qy, k2)
    _rhs(s + 0.5 * h, st[0] + 0.5 * h * k2[0], st[1] + 0.5 * h * k2[1], L, EI, qx, qy, k3)
    _rhs(s + h, st[0] + h * k3[0], st[1] + h * k3[1], L, EI, qx, qy, k4)
    cdef int j
    for j in range(4):
        st[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])


def loaded_rk4_end(double p0, double L, double EI, double qx, double qy, int steps):
    cdef double h = L / steps
    cdef double st[4]
    cdef int i
    st[0] = 0.0; st[1] = p0; st[2] = 0.0; st[3] = 0.0
    with nogil:
        for i in range(steps):
            _step(i * h, h, st, L, EI, qx, qy)
    return st[0], st[1]


def loaded_rk4_path(double p0, double L, double EI, double qx, double qy, int steps):
    cdef double h = L / steps
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((steps + 1, 4))
    cdef double[:, ::1] o = out
    cdef double st[4]
    cdef int i, j
    st[0] = 0.0; st[1] = p0; st[2] = 0.0; st[3] = 0.0
    with nogil:
        for j in range(4):
            o[0, j] = st[j]
        for i in range(steps):
            _step(i * h, h, st, L, EI, qx, qy)
            for j in range(4):
                o[i + 1, j] = st[j]
    return out


def chord_terms(a_in, edges_in, double L, double W, xg_in, wg_in):
    cdef double[::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef double[::1] edges = np.ascontiguousarray(edges_in, dtype=np.float64)
    cdef double[::1] xg = np.ascontiguousarray(xg_in, dtype=np.float64)
    cdef double[::1] wg = np.ascontiguousarray(wg_in, dtype=np.float64)
    cdef Py_ssize_t m = a.shape[0], n = edges.shape[0] - 1, nq = xg.shape[0]
    cp_arr = np.empty(n)
    cm_arr = np.empty(n)
    dcp_arr = np.empty((n, m))
    dcm_arr = np.empty((n, m))
    cdef double[::1] cp = cp_arr, cm = cm_arr
    cdef double[:, ::1] dcp = dcp_arr, dcm = dcm_arr
    work = np.empty((6, m))
    cdef double[:, ::1] wk = work
    cdef Py_ssize_t j, q, i
    cdef double half, mid, xi, wq, th, p, c, sn, Ic, Is, t0, t1, hw, sg
    cdef double A, B, C, dA, dB, dsin, dcos
    hw = 0.5 * W
    with nogil:
        for j in range(n):
            half = 0.5 * (edges[j + 1] - edges[j])
            mid = 0.5 * (edges[j + 1] + edges[j])
            Ic = 0.0
            Is = 0.0
            for i in range(m):
                wk[0, i] = 0.0
                wk[1, i] = 0.0
            for q in range(nq):
                xi = mid + half * xg[q]
                wq = L * half * wg[q]
                th = 0.0
                p = 1.0
                for i in range(m):
                    p *= xi
                    th += a[i] * p
                c = cos(th)
                sn = sin(th)
                Ic += wq * c
                Is += wq * sn
                p = 1.0
                for i in range(m):
                    p *= xi
                    wk[0, i] -= wq * sn * p
                    wk[1, i] += wq * c * p
            # endpoint angles and their coefficient derivatives
            t0 = 0.0
            t1 = 0.0
            p = 1.0
            for i in range(m):
                p *= edges[j]
                wk[2, i] = p
                t0 += a[i] * p
            p = 1.0
            for i in range(m):
                p *= edges[j + 1]
                wk[3, i] = p
                t1 += a[i] * p
            dsin = sin(t1) - sin(t0)
            dcos = cos(t1) - cos(t0)
            for i in range(m):
                wk[4, i] = cos(t1) * wk[3, i] - cos(t0) * wk[2, i]
                wk[5, i] = -(sin(t1) * wk[3, i] - sin(t0) * wk[2, i])
            for sg in (1.0, -1.0):
                A = Ic - sg * hw * dsin
                B = Is + sg * hw * dcos
                C = sqrt(A * A + B * B)
                if sg > 0:
                    cp[j] = C
                else:
                    cm[j] = C
                for i in range(m):
                    dA = wk[0, i] - sg * hw * wk[4, i]
                    dB = wk[1, i] + sg * hw * wk[5, i]
                    if sg > 0:
                        dcp[j, i] = (A * dA + B * dB) / C
                    else:
                        dcm[j, i] = (A * dA + B * dB) / C
    return cp_arr, cm_arr, dcp_arr, dcm_arr

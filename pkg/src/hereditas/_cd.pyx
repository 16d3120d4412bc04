# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled coordinate-descent sweep for the lasso.

Hot kernel; semantics must match ``hereditas._cd_numpy.cd_solve``.
"""

from libc.math cimport fabs


cdef inline double _soft(double z, double lam) nogil:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


cdef bint _kkt_ok(double[:, ::1] XT, double[::1] r, double[::1] b,
                  double[::1] col_nrm2, double lam, double kkt_tol,
                  double inv_n) nogil:
    cdef Py_ssize_t m = XT.shape[0]
    cdef Py_ssize_t n = XT.shape[1]
    cdef Py_ssize_t i, j
    cdef double g, sign
    for j in range(m):
        if col_nrm2[j] <= 0.0:
            continue
        g = 0.0
        for i in range(n):
            g += XT[j, i] * r[i]
        g *= inv_n
        if b[j] != 0.0:
            sign = 1.0 if b[j] > 0.0 else -1.0
            if fabs(g - lam * sign) > kkt_tol:
                return False
        elif fabs(g) > lam + kkt_tol:
            return False
    return True


def cd_solve(double[:, ::1] XT, double[::1] r, double[::1] b,
             double[::1] col_nrm2, double lam, double tol,
             double kkt_tol, long max_sweeps):
    """See ``hereditas._cd_numpy.cd_solve`` for the contract."""
    cdef Py_ssize_t m = XT.shape[0]
    cdef Py_ssize_t n = XT.shape[1]
    cdef Py_ssize_t i, j
    cdef long sweep, sweeps = 0
    cdef double inv_n = 1.0 / n
    cdef double g, b_new, d, ad, max_delta, vj
    cdef bint converged = False

    with nogil:
        for sweep in range(max_sweeps):
            sweeps = sweep + 1
            max_delta = 0.0
            for j in range(m):
                vj = col_nrm2[j]
                if vj <= 0.0:
                    continue
                g = 0.0
                for i in range(n):
                    g += XT[j, i] * r[i]
                g *= inv_n
                b_new = _soft(g + vj * b[j], lam) / vj
                d = b_new - b[j]
                if d != 0.0:
                    for i in range(n):
                        r[i] -= d * XT[j, i]
                    b[j] = b_new
                ad = fabs(d)
                if ad > max_delta:
                    max_delta = ad
            if max_delta <= tol:
                if _kkt_ok(XT, r, b, col_nrm2, lam, kkt_tol, inv_n):
                    converged = True
                    break
    return sweeps, converged

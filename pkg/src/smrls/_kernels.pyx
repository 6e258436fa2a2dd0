# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-sample kernels.

Every function mirrors one in :mod:`smrls._pykernels` with the same signature
and in-place semantics. Arrays must be C-contiguous float64 (uint8 for the
visited flags, int64 for partition indices).
"""
import numpy as np

from libc.math cimport exp, ceil

from smrls.errors import DowndateSingular


cdef inline void _regressor(const double[:, ::1] centers, const double[::1] two_var,
                            const double[::1] x, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t N = centers.shape[0]
    cdef Py_ssize_t n = centers.shape[1]
    cdef double d2, diff
    for i in range(N):
        d2 = 0.0
        for j in range(n):
            diff = x[j] - centers[i, j]
            d2 += diff * diff
        out[i] = exp(-d2 / two_var[i])


cdef inline void _matvec(const double[:, ::1] P, const double[::1] v,
                         double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t N = P.shape[0]
    cdef double s
    for i in range(N):
        s = 0.0
        for j in range(N):
            s += P[i, j] * v[j]
        out[i] = s


cdef inline double _dot(const double[::1] a, const double[::1] b) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(a.shape[0]):
        s += a[i] * b[i]
    return s


cdef inline void _sym_rank_one(double[:, ::1] P, const double[::1] u, double c) noexcept nogil:
    # P <- P - c u u^T, written on the upper triangle and mirrored
    cdef Py_ssize_t i, j
    cdef Py_ssize_t N = P.shape[0]
    cdef double val
    for i in range(N):
        for j in range(i, N):
            val = P[i, j] - c * (u[i] * u[j])
            P[i, j] = val
            P[j, i] = val


cdef inline Py_ssize_t _encode(const double[::1] x, Py_ssize_t m_d) noexcept nogil:
    cdef Py_ssize_t i, d, index = 0, stride = 1
    for i in range(x.shape[0]):
        d = <Py_ssize_t>ceil((x[i] + 1.0) * m_d / 2.0 - 1.0)
        if d < 0:
            d = 0
        elif d > m_d - 1:
            d = m_d - 1
        index += d * stride
        stride *= m_d
    return index


def regressor(const double[:, ::1] centers, const double[::1] two_var,
              const double[::1] x, double[::1] out):
    _regressor(centers, two_var, x, out)


def encode(const double[::1] x, Py_ssize_t m_d):
    """Zero-based lattice cell index of a normalized point."""
    return _encode(x, m_d)


def rank_one_update(double[:, ::1] P, const double[::1] v, double sign, double guard):
    """In place: ``P <- (P^-1 + sign v v^T)^-1`` via Sherman-Morrison."""
    cdef Py_ssize_t N = P.shape[0]
    cdef double[::1] u = np.empty(N)
    _matvec(P, v, u)
    cdef double denom = 1.0 + sign * _dot(v, u)
    if sign < 0 and denom < guard:
        raise DowndateSingular(denom, guard)
    _sym_rank_one(P, u, sign / denom)


def sgd_stream(const double[:, ::1] centers, const double[::1] two_var,
               const double[:, ::1] X, const double[::1] Y, double[::1] W,
               double eta, double[::1] yhat):
    cdef Py_ssize_t N = centers.shape[0]
    cdef Py_ssize_t k, i
    cdef double[::1] phi = np.empty(N)
    cdef double pred, e
    for k in range(X.shape[0]):
        _regressor(centers, two_var, X[k], phi)
        pred = _dot(W, phi)
        yhat[k] = pred
        e = Y[k] - pred
        for i in range(N):
            W[i] += eta * phi[i] * e


def rls_stream(const double[:, ::1] centers, const double[::1] two_var,
               const double[:, ::1] X, const double[::1] Y, double[::1] W,
               double[:, ::1] P, double lam, double[::1] yhat):
    cdef Py_ssize_t N = centers.shape[0]
    cdef Py_ssize_t k, i, j
    cdef double[::1] phi = np.empty(N)
    cdef double[::1] u = np.empty(N)
    cdef double pred, e, denom
    cdef double inv_lam = 1.0 / lam
    for k in range(X.shape[0]):
        _regressor(centers, two_var, X[k], phi)
        pred = _dot(W, phi)
        yhat[k] = pred
        e = Y[k] - pred
        _matvec(P, phi, u)
        denom = lam + _dot(phi, u)
        _sym_rank_one(P, u, 1.0 / denom)
        if lam != 1.0:
            for i in range(N):
                for j in range(N):
                    P[i, j] *= inv_lam
        _matvec(P, phi, u)
        for i in range(N):
            W[i] += u[i] * e


def smrls_stream(const double[:, ::1] centers, const double[::1] two_var,
                 const double[:, ::1] X, const double[::1] Y, double[::1] W,
                 double[:, ::1] P, double[:, ::1] A, double[::1] B,
                 unsigned char[::1] visited, Py_ssize_t m_d, double guard,
                 double[::1] yhat, long long[::1] part):
    """Latest-sample selective memory stream; returns the number of first visits.

    On a failed downdate the state is left exactly as after the previous
    sample and :class:`DowndateSingular` carries the failing step index.
    """
    cdef Py_ssize_t N = centers.shape[0]
    cdef Py_ssize_t n = centers.shape[1]
    cdef Py_ssize_t k, i, a
    cdef double[::1] phi = np.empty(N)
    cdef double[::1] phi_old = np.empty(N)
    cdef double[::1] u = np.empty(N)
    cdef double pred, e_new, e_old, denom
    cdef bint seen
    cdef Py_ssize_t first_visits = 0
    for k in range(X.shape[0]):
        a = _encode(X[k], m_d)
        part[k] = a
        _regressor(centers, two_var, X[k], phi)
        pred = _dot(W, phi)
        yhat[k] = pred
        e_new = Y[k] - pred
        seen = visited[a] != 0
        e_old = 0.0
        if seen:
            _regressor(centers, two_var, A[a], phi_old)
            e_old = B[a] - _dot(W, phi_old)
            _matvec(P, phi_old, u)
            denom = 1.0 - _dot(phi_old, u)
            if denom < guard:
                raise DowndateSingular(denom, guard, k)
            _sym_rank_one(P, u, -1.0 / denom)
        _matvec(P, phi, u)
        denom = 1.0 + _dot(phi, u)
        _sym_rank_one(P, u, 1.0 / denom)
        _matvec(P, phi, u)
        for i in range(N):
            W[i] += u[i] * e_new
        if seen:
            _matvec(P, phi_old, u)
            for i in range(N):
                W[i] -= u[i] * e_old
        else:
            visited[a] = 1
            first_visits += 1
        for i in range(n):
            A[a, i] = X[k, i]
        B[a] = Y[k]
    return first_visits

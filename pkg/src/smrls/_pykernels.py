"""Pure-Python (numpy) versions of the per-sample kernels.

Selected automatically when the compiled ``smrls._kernels`` extension is not
available, or forced with ``SMRLS_PURE_PYTHON=1``. Signatures and in-place
semantics match the compiled module exactly.
"""
import math

import numpy as np

from smrls.errors import DowndateSingular


def regressor(centers, two_var, x, out):
    d2 = np.sum((x - centers) ** 2, axis=1)
    np.exp(-d2 / two_var, out=out)


def encode(x, m_d):
    """Zero-based lattice cell index of a normalized point."""
    index = 0
    stride = 1
    for xi in x:
        d = math.ceil((xi + 1.0) * m_d / 2.0 - 1.0)
        d = min(max(d, 0), m_d - 1)
        index += d * stride
        stride *= m_d
    return index


def _sym_rank_one(P, u, c):
    P -= c * np.outer(u, u)
    # re-symmetrize every step; the compiled kernel mirrors the upper triangle
    P[...] = 0.5 * (P + P.T)


def rank_one_update(P, v, sign, guard):
    """In place: ``P <- (P^-1 + sign v v^T)^-1`` via Sherman-Morrison."""
    u = P @ v
    denom = 1.0 + sign * float(v @ u)
    if sign < 0 and denom < guard:
        raise DowndateSingular(denom, guard)
    _sym_rank_one(P, u, sign / denom)


def sgd_stream(centers, two_var, X, Y, W, eta, yhat):
    phi = np.empty(centers.shape[0])
    for k in range(X.shape[0]):
        regressor(centers, two_var, X[k], phi)
        pred = float(W @ phi)
        yhat[k] = pred
        W += eta * phi * (Y[k] - pred)


def rls_stream(centers, two_var, X, Y, W, P, lam, yhat):
    phi = np.empty(centers.shape[0])
    for k in range(X.shape[0]):
        regressor(centers, two_var, X[k], phi)
        pred = float(W @ phi)
        yhat[k] = pred
        u = P @ phi
        _sym_rank_one(P, u, 1.0 / (lam + float(phi @ u)))
        if lam != 1.0:
            P *= 1.0 / lam
        W += (P @ phi) * (Y[k] - pred)


def smrls_stream(centers, two_var, X, Y, W, P, A, B, visited, m_d, guard, yhat, part):
    """Latest-sample selective memory stream; returns the number of first visits."""
    N = centers.shape[0]
    phi = np.empty(N)
    phi_old = np.empty(N)
    first_visits = 0
    for k in range(X.shape[0]):
        a = encode(X[k], m_d)
        part[k] = a
        regressor(centers, two_var, X[k], phi)
        pred = float(W @ phi)
        yhat[k] = pred
        e_new = Y[k] - pred
        seen = bool(visited[a])
        if seen:
            regressor(centers, two_var, A[a], phi_old)
            e_old = B[a] - float(W @ phi_old)
            u = P @ phi_old
            denom = 1.0 - float(phi_old @ u)
            if denom < guard:
                raise DowndateSingular(denom, guard, k)
            _sym_rank_one(P, u, -1.0 / denom)
        u = P @ phi
        _sym_rank_one(P, u, 1.0 / (1.0 + float(phi @ u)))
        W += (P @ phi) * e_new
        if seen:
            W -= (P @ phi_old) * e_old
        else:
            visited[a] = 1
            first_visits += 1
        A[a] = X[k]
        B[a] = Y[k]
    return first_visits

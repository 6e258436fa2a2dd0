"""SGD and forgetting-factor RLS trainers plus the dense least-squares oracle."""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from smrls.kernels import active as _kern

DEFAULT_GUARD = 1e-10


@dataclass
class EstimatorState:
    """Weights, covariance and hyperparameters of one training session.

    ``covariance`` is ``None`` for SGD. ``p0`` and ``w0`` keep the initial
    values so oracles can rebuild the objective.
    """

    weights: np.ndarray
    covariance: np.ndarray = None
    eta: float = 0.02
    lam: float = 1.0
    p0: np.ndarray = None
    w0: np.ndarray = field(default=None)

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=float).reshape(-1)
        if self.w0 is None:
            self.w0 = self.weights.copy()
        self.w0 = np.array(self.w0, dtype=float).reshape(-1)
        if self.covariance is not None:
            self.covariance = np.array(self.covariance, dtype=float, order="C")
            if self.p0 is None:
                self.p0 = self.covariance.copy()
        if self.p0 is not None:
            self.p0 = np.array(self.p0, dtype=float)
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {self.lam}")
        if self.eta < 0:
            raise ValueError(f"learning rate must be non-negative, got {self.eta}")

    @classmethod
    def for_sgd(cls, n_neurons, eta=0.02, w0=0.0):
        w = np.full(n_neurons, w0, dtype=float) if np.isscalar(w0) else w0
        return cls(weights=w, eta=eta)

    @classmethod
    def for_rls(cls, n_neurons, lam=1.0, p0_scale=10.0, w0=0.0):
        w = np.full(n_neurons, w0, dtype=float) if np.isscalar(w0) else w0
        return cls(weights=w, covariance=p0_scale * np.eye(n_neurons), lam=lam)

    @property
    def n_neurons(self):
        return self.weights.shape[0]

    def copy(self):
        return EstimatorState(
            weights=self.weights.copy(),
            covariance=None if self.covariance is None else self.covariance.copy(),
            eta=self.eta,
            lam=self.lam,
            p0=None if self.p0 is None else self.p0.copy(),
            w0=self.w0.copy(),
        )


def _vec(v, n):
    v = np.ascontiguousarray(v, dtype=float).reshape(-1)
    if v.shape[0] != n:
        raise ValueError(f"regressor has length {v.shape[0]}, expected {n}")
    return v


def sgd_gradient(weights, phi, y):
    """Gradient of ``0.5 * (y - W^T phi)^2`` with respect to ``W``."""
    return -phi * (y - weights @ phi)


def sgd_step(state, phi, y):
    """One SGD update in place; returns the a priori error ``y - W^T phi``."""
    phi = _vec(phi, state.n_neurons)
    e = float(y - state.weights @ phi)
    state.weights += state.eta * phi * e
    return e


def ffrls_step(state, phi, y):
    """One forgetting-factor RLS update in place; returns the a priori error.

    ``P <- (P - P phi phi^T P / (lam + phi^T P phi)) / lam`` followed by
    ``W <- W + P phi e`` with the updated ``P``.
    """
    phi = _vec(phi, state.n_neurons)
    P = state.covariance
    e = float(y - state.weights @ phi)
    u = P @ phi
    P -= np.outer(u, u) / (state.lam + float(phi @ u))
    if state.lam != 1.0:
        P *= 1.0 / state.lam
    P[...] = 0.5 * (P + P.T)
    state.weights += (P @ phi) * e
    return e


def rank_one_update(P, v, sign, guard=DEFAULT_GUARD):
    """Sherman-Morrison: the matrix whose inverse is ``P^-1 + sign * v v^T``.

    ``sign`` is +1 (add a sample) or -1 (remove one). A downdate whose margin
    ``1 - v^T P v`` is below ``guard`` raises :class:`DowndateSingular`.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    out = np.array(P, dtype=float, order="C")
    v = _vec(v, out.shape[0])
    _kern.rank_one_update(out, v, float(sign), float(guard))
    return out


def batch_oracle_weighted(regressors, measurements, sample_weights, p0, w0):
    """Exact minimizer of ``sum_i w_i (y_i - W^T phi_i)^2 + (W-W0)^T P0^-1 (W-W0)``.

    Solves the regularized normal equations with a dense Cholesky solve.
    """
    w0 = np.asarray(w0, dtype=float).reshape(-1)
    p0_inv = np.linalg.inv(np.asarray(p0, dtype=float))
    Phi = np.asarray(regressors, dtype=float).reshape(-1, w0.shape[0])
    y = np.asarray(measurements, dtype=float).reshape(-1)
    c = np.asarray(sample_weights, dtype=float).reshape(-1)
    if np.any(c < 0):
        raise ValueError("sample weights must be non-negative")
    H = p0_inv + (Phi * c[:, None]).T @ Phi
    b = p0_inv @ w0 + Phi.T @ (c * y)
    return scipy.linalg.solve(H, b, assume_a="pos")


class SgdTrainer:
    """Streams samples through SGD on a fixed RBF network."""

    name = "sgd"

    def __init__(self, network, eta=0.02, w0=0.0):
        self.network = network
        self.state = EstimatorState.for_sgd(network.n_neurons, eta=eta, w0=w0)
        self.network.weights = self.state.weights

    def run(self, X, Y, kernels=None):
        """Train on normalized inputs ``X`` (K, n) and targets ``Y``; returns a priori predictions."""
        k = kernels or _kern
        X = np.ascontiguousarray(X, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        yhat = np.empty(X.shape[0])
        k.sgd_stream(self.network.centers, self.network.two_var, X, Y,
                     self.state.weights, self.state.eta, yhat)
        return yhat, None


class RlsTrainer:
    """Streams samples through forgetting-factor RLS (``lam = 1`` is ordinary RLS)."""

    def __init__(self, network, lam=0.999, p0_scale=10.0, w0=0.0):
        self.network = network
        self.name = "rls" if lam == 1.0 else "ffrls"
        self.state = EstimatorState.for_rls(network.n_neurons, lam=lam, p0_scale=p0_scale, w0=w0)
        self.network.weights = self.state.weights

    def run(self, X, Y, kernels=None):
        k = kernels or _kern
        X = np.ascontiguousarray(X, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        yhat = np.empty(X.shape[0])
        k.rls_stream(self.network.centers, self.network.two_var, X, Y,
                     self.state.weights, self.state.covariance, self.state.lam, yhat)
        return yhat, None

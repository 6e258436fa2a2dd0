"""Selective memory recursive least squares.

Each lattice partition of the normalized input space remembers its latest
sample. A step removes the partition's previous sample from the least-squares
objective and adds the new one, so the weights always minimize

    sum over visited partitions j of (phi_j - W^T Phi(gamma_j))^2
        + (W - W0)^T P0^-1 (W - W0)

with only matrix-vector products and two Sherman-Morrison corrections.
"""
from dataclasses import dataclass

import numpy as np

from smrls.errors import DowndateSingular
from smrls.estimators import DEFAULT_GUARD, EstimatorState
from smrls.input_space import LATEST, LatestSampleRule, Normalizer, PartitionStore, SynthSample
from smrls.kernels import active as _kern
from smrls.rbf import regressor


@dataclass
class SmrlsState:
    network: object
    estimator: EstimatorState
    store: PartitionStore
    normalizer: Normalizer
    guard: float = DEFAULT_GUARD

    @classmethod
    def create(cls, network, partitions_per_dim=100, p0_scale=10.0, w0=0.0,
               normalizer=None, rule=LATEST, guard=DEFAULT_GUARD):
        n = network.dimension
        est = EstimatorState.for_rls(network.n_neurons, lam=1.0, p0_scale=p0_scale, w0=w0)
        network.weights = est.weights
        return cls(
            network=network,
            estimator=est,
            store=PartitionStore(partitions_per_dim, n, rule=rule),
            normalizer=normalizer or Normalizer.unit(n),
            guard=guard,
        )

    @property
    def weights(self):
        return self.estimator.weights

    @property
    def covariance(self):
        return self.estimator.covariance


def smrls_step(state, raw_input, measurement):
    """Process one raw sample in place; returns the a priori error."""
    x = state.normalizer.normalize(np.asarray(raw_input, dtype=float).reshape(-1))
    if isinstance(state.store.rule, LatestSampleRule):
        yhat, _ = run_stream(state, x[None, :], np.array([float(measurement)]))
        return float(measurement) - float(yhat[0])
    return _generic_step(state, x, float(measurement))


def _generic_step(state, x, y):
    # any memory rule: the stored sample becomes rule.merge(old, new)
    store, net, est = state.store, state.network, state.estimator
    W, P = est.weights, est.covariance
    a = store.encode(x)
    seen, old = store.lookup(a)
    merged = store.rule.merge(old, SynthSample(x, y))
    phi_new = regressor(net, merged.input)
    e_pred = y - float(W @ regressor(net, x))
    e_new = merged.output - float(W @ phi_new)
    P_next = P.copy()
    if seen:
        phi_old = regressor(net, old.input)
        e_old = old.output - float(W @ phi_old)
        _kern.rank_one_update(P_next, phi_old, -1.0, state.guard)
    _kern.rank_one_update(P_next, phi_new, 1.0, state.guard)
    dW = (P_next @ phi_new) * e_new
    if seen:
        dW -= (P_next @ phi_old) * e_old
    store.put(a, merged)
    P[...] = P_next
    W += dW
    return e_pred


def run_stream(state, X_norm, Y, kernels=None):
    """Train on a batch of normalized inputs with the latest-sample rule.

    Returns the a priori predictions and the one-based partition index of
    every sample. On :class:`DowndateSingular` the state holds everything up
    to the failing sample.
    """
    if not isinstance(state.store.rule, LatestSampleRule):
        X = np.atleast_2d(X_norm)
        yhat = np.empty(X.shape[0])
        part = np.empty(X.shape[0], dtype=np.int64)
        for k in range(X.shape[0]):
            part[k] = state.store.encode(X[k])
            yhat[k] = Y[k] - _generic_step(state, X[k], float(Y[k]))
        return yhat, part
    k = kernels or _kern
    X = np.ascontiguousarray(X_norm, dtype=float)
    Y = np.ascontiguousarray(Y, dtype=float)
    if X.ndim != 2 or X.shape[1] != state.network.dimension:
        raise ValueError(f"inputs must have shape (K, {state.network.dimension})")
    yhat = np.empty(X.shape[0])
    part = np.empty(X.shape[0], dtype=np.int64)
    s = state.store
    k.smrls_stream(state.network.centers, state.network.two_var, X, Y,
                   state.estimator.weights, state.estimator.covariance,
                   s.inputs, s.outputs, s.visited, s.per_dim, state.guard, yhat, part)
    return yhat, part + 1


def rebuild_information_matrix(state):
    """``P0^-1 + sum over visited j of Phi(gamma_j) Phi(gamma_j)^T`` from scratch."""
    est = state.estimator
    info = np.linalg.inv(est.p0)
    gammas, _ = state.store.synthesized_samples()
    for g in gammas:
        phi = regressor(state.network, g)
        info += np.outer(phi, phi)
    return info


def learned_knowledge(state):
    """Frozen copy of the current weight vector."""
    w = state.estimator.weights.copy()
    w.flags.writeable = False
    return w


class SmrlsTrainer:
    name = "smrls"

    def __init__(self, network, partitions_per_dim=100, p0_scale=10.0, w0=0.0,
                 guard=DEFAULT_GUARD):
        self.network = network
        self.state = SmrlsState.create(network, partitions_per_dim, p0_scale, w0, guard=guard)

    def run(self, X, Y, kernels=None):
        return run_stream(self.state, X, Y, kernels)


__all__ = [
    "DowndateSingular",
    "SmrlsState",
    "SmrlsTrainer",
    "learned_knowledge",
    "rebuild_information_matrix",
    "run_stream",
    "smrls_step",
]

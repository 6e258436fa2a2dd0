"""Gaussian radial basis function networks on an even lattice."""
from dataclasses import dataclass

import numpy as np

from smrls.kernels import active as _kern


@dataclass
class RbfNetwork:
    """Linearly parameterized Gaussian RBF approximator ``f(x) = W^T Phi(x)``.

    Attributes
    ----------
    centers : ndarray, shape (N, n)
        Neuron centers in normalized input coordinates.
    widths : ndarray, shape (N,)
        Receptive field widths, all strictly positive.
    weights : ndarray, shape (N,)
        Output weights. Trainers mutate this array; nothing in this module does.
    """

    centers: np.ndarray
    widths: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.centers = np.ascontiguousarray(np.atleast_2d(self.centers), dtype=float)
        self.widths = np.ascontiguousarray(self.widths, dtype=float).reshape(-1)
        self.weights = np.ascontiguousarray(self.weights, dtype=float).reshape(-1)
        N = self.centers.shape[0]
        if N < 1:
            raise ValueError("network needs at least one neuron")
        if self.widths.shape[0] != N or self.weights.shape[0] != N:
            raise ValueError(
                f"centers ({N}), widths ({self.widths.shape[0]}) and weights "
                f"({self.weights.shape[0]}) must have equal length"
            )
        if not np.all(self.widths > 0):
            raise ValueError("all receptive field widths must be positive")
        self.two_var = np.ascontiguousarray(2.0 * self.widths**2)

    @property
    def n_neurons(self):
        return self.centers.shape[0]

    @property
    def dimension(self):
        return self.centers.shape[1]

    def with_weights(self, weights):
        """Copy of the network sharing centers and widths but holding ``weights``."""
        return RbfNetwork(self.centers, self.widths, np.array(weights, dtype=float))

    def _check_input(self, x):
        x = np.ascontiguousarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dimension:
            raise ValueError(
                f"input has dimension {x.shape[0]}, network expects {self.dimension}"
            )
        return x


def grid_coordinates(per_dim_count):
    if per_dim_count == 1:
        return np.zeros(1)
    return np.linspace(-1.0, 1.0, per_dim_count)


def build_grid_network(per_dim_count, dimension, width):
    """Evenly spaced neurons over ``[-1, 1]^dimension`` including the boundary.

    Centers are ordered with the first coordinate varying fastest. Weights
    start at zero.
    """
    if int(per_dim_count) != per_dim_count or per_dim_count < 1:
        raise ValueError(f"per_dim_count must be a positive integer, got {per_dim_count}")
    if int(dimension) != dimension or dimension < 1:
        raise ValueError(f"dimension must be a positive integer, got {dimension}")
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    per_dim_count, dimension = int(per_dim_count), int(dimension)
    axes = [grid_coordinates(per_dim_count)] * dimension
    mesh = np.meshgrid(*axes[::-1], indexing="ij")
    centers = np.stack([m.reshape(-1) for m in mesh[::-1]], axis=1)
    N = centers.shape[0]
    return RbfNetwork(centers, np.full(N, float(width)), np.zeros(N))


def regressor(net, x):
    """Gaussian responses ``exp(-|x - c_i|^2 / (2 sigma_i^2))`` of every neuron."""
    x = net._check_input(x)
    out = np.empty(net.n_neurons)
    _kern.regressor(net.centers, net.two_var, x, out)
    return out


def regressor_matrix(net, X):
    """Row-wise regressors for a batch of inputs, shape (K, N)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != net.dimension:
        raise ValueError(
            f"inputs have dimension {X.shape[1]}, network expects {net.dimension}"
        )
    d2 = ((X[:, None, :] - net.centers[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-d2 / net.two_var[None, :])


def evaluate(net, x):
    return float(net.weights @ regressor(net, x))


def evaluate_many(net, X, weights=None):
    w = net.weights if weights is None else np.asarray(weights, dtype=float)
    return regressor_matrix(net, X) @ w

"""Input normalization, lattice partitioning and the per-partition sample memory."""
import abc
from dataclasses import dataclass

import numpy as np

from smrls.kernels import active as _kern


class Normalizer:
    """Affine map of raw states onto ``[-1, 1]^n`` with clamping outside the bounds."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float).reshape(-1)
        self.upper = np.asarray(upper, dtype=float).reshape(-1)
        if self.lower.shape != self.upper.shape:
            raise ValueError("lower and upper bounds differ in dimension")
        if not np.all(self.upper > self.lower):
            raise ValueError(f"degenerate bounds: lower={self.lower}, upper={self.upper}")

    @classmethod
    def unit(cls, dimension):
        return cls(-np.ones(dimension), np.ones(dimension))

    @property
    def dimension(self):
        return self.lower.shape[0]

    def __call__(self, raw):
        return self.normalize(raw)

    def normalize(self, raw):
        """Normalize a point or a (K, n) batch of points."""
        raw = np.asarray(raw, dtype=float)
        if raw.shape[-1] != self.dimension:
            raise ValueError(
                f"raw input has dimension {raw.shape[-1]}, expected {self.dimension}"
            )
        x = (2.0 * raw - self.upper - self.lower) / (self.upper - self.lower)
        return np.clip(x, -1.0, 1.0)


def per_dim_partitions(n_partitions, dimension):
    """Integer ``m`` with ``m ** dimension == n_partitions``; raises otherwise."""
    if n_partitions < 1 or dimension < 1:
        raise ValueError("partition count and dimension must be positive")
    m = int(round(n_partitions ** (1.0 / dimension)))
    for cand in (m - 1, m, m + 1):
        if cand >= 1 and cand**dimension == n_partitions:
            return cand
    raise ValueError(f"{n_partitions} partitions is not a perfect power of {dimension}")


def encode_partition(x_norm, n_partitions, dimension):
    """One-based serial number of the lattice cell containing ``x_norm``.

    Per-dimension indices are ``ceil((x_i + 1) m / 2 - 1)`` clamped to
    ``[0, m - 1]``, combined with the first dimension varying fastest.
    """
    m = per_dim_partitions(n_partitions, dimension)
    x = np.ascontiguousarray(x_norm, dtype=float).reshape(-1)
    if x.shape[0] != dimension:
        raise ValueError(f"point has dimension {x.shape[0]}, expected {dimension}")
    return int(_kern.encode(x, m)) + 1


def cell_bounds(index, per_dim, dimension):
    """Lower and upper corners of the cell with one-based ``index``."""
    j = index - 1
    lo = np.empty(dimension)
    for i in range(dimension):
        d = j % per_dim
        j //= per_dim
        lo[i] = -1.0 + 2.0 * d / per_dim
    return lo, lo + 2.0 / per_dim


@dataclass(frozen=True)
class SynthSample:
    input: np.ndarray
    output: float


class MemoryUpdateRule(abc.ABC):
    """How a partition's synthesized sample absorbs a new sample that falls into it."""

    @abc.abstractmethod
    def merge(self, stored, new):
        """Return the partition's synthesized sample after seeing ``new``."""


class LatestSampleRule(MemoryUpdateRule):
    """Keep only the most recent sample of each partition."""

    def merge(self, stored, new):
        return new


LATEST = LatestSampleRule()


class PartitionStore:
    """Dense memory of one synthesized sample per lattice partition.

    ``inputs`` (N_P, n), ``outputs`` (N_P,) and ``visited`` (N_P,) are plain
    arrays so the compiled SMRLS kernel can update them in place. Unvisited
    partitions hold the zero sample.
    """

    def __init__(self, per_dim, dimension, rule=LATEST):
        if per_dim < 1 or dimension < 1:
            raise ValueError("per_dim and dimension must be positive")
        self.per_dim = int(per_dim)
        self.dimension = int(dimension)
        self.rule = rule
        self.n_partitions = self.per_dim**self.dimension
        self.inputs = np.zeros((self.n_partitions, self.dimension))
        self.outputs = np.zeros(self.n_partitions)
        self.visited = np.zeros(self.n_partitions, dtype=np.uint8)

    @property
    def visited_count(self):
        return int(np.count_nonzero(self.visited))

    def encode(self, x_norm):
        return encode_partition(x_norm, self.n_partitions, self.dimension)

    def _check_index(self, index):
        if not 1 <= index <= self.n_partitions:
            raise IndexError(f"partition {index} outside [1, {self.n_partitions}]")

    def lookup(self, index):
        """``(visited, SynthSample)`` stored for partition ``index`` (one-based)."""
        self._check_index(index)
        j = index - 1
        return bool(self.visited[j]), SynthSample(self.inputs[j].copy(), float(self.outputs[j]))

    def update(self, index, sample):
        """Merge ``sample`` into partition ``index``.

        Returns the displaced synthesized sample and whether the partition had
        been visited before.
        """
        self._check_index(index)
        x = np.asarray(sample.input, dtype=float).reshape(-1)
        actual = self.encode(x)
        if actual != index:
            raise ValueError(f"sample lies in partition {actual}, not {index}")
        visited_before, displaced = self.lookup(index)
        self.put(index, self.rule.merge(displaced, SynthSample(x.copy(), float(sample.output))))
        return displaced, visited_before

    def put(self, index, synth):
        """Overwrite partition ``index`` with an already merged synthesized sample."""
        self._check_index(index)
        j = index - 1
        self.inputs[j] = synth.input
        self.outputs[j] = synth.output
        self.visited[j] = 1

    def synthesized_samples(self):
        """Inputs and outputs of visited partitions, in partition order."""
        mask = self.visited.astype(bool)
        return self.inputs[mask].copy(), self.outputs[mask].copy()

    def snapshot_rows(self):
        """Rows ``(index, gamma_1..gamma_n, phi, visited)`` for every partition."""
        for j in range(self.n_partitions):
            yield (j + 1, *self.inputs[j], self.outputs[j], int(self.visited[j]))


def memory_lookup(store, index):
    return store.lookup(index)


def memory_update(store, index, new_sample):
    return store.update(index, new_sample)

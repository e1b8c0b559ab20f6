"""Labeling and counterexample oracles.

Oracles count their own queries in ``calls``. The pool-backed versions answer
from a labeled :class:`Dataset`; :class:`SampledCounterexample` only sees a
labeling oracle and looks for violators among ``m`` random pool draws.

Detection is one-sided: a reported index is always a genuine violator, but
"none" can be wrong. If a fraction ``rho`` of the pool violates the slab, a
single query misses all of them with probability ``(1 - rho)**m``, so
``m = ceil(ln(1/delta) / rho)`` (see :func:`sample_size_for`) detects with
probability at least ``1 - delta``.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .dataset import Dataset, Label
from .engine import LabelingOracle
from .errors import EmptyPool, IndexOutOfRange, NonPositiveInput
from .geometry import DEFAULT_TOL, Slab, as_points


class PoolLabelingOracle:
    def __init__(self, data: Dataset):
        data.require_labels()
        self.data = data
        self.calls = 0

    def query(self, index: int) -> Label:
        index = int(index)
        if not 0 <= index < self.data.n:
            raise IndexOutOfRange(f"index {index} outside [0, {self.data.n})")
        self.calls += 1
        return self.data.label(index)


class ExactCounterexample:
    """Returns the lowest index that is interior to, or on the wrong side of,
    the queried slab."""

    def __init__(self, data: Dataset, tol: float = DEFAULT_TOL):
        self.labels = data.require_labels()
        self.data = data
        self.tol = tol
        self.calls = 0

    def query(self, slab: Slab) -> Optional[int]:
        self.calls += 1
        if self.data.n == 0:
            return None
        bad = _violations(slab.params(self.data.points), self.labels, self.tol)
        hits = np.flatnonzero(bad)
        return int(hits[0]) if hits.size else None


def _violations(t: np.ndarray, labels: np.ndarray, tol: float) -> np.ndarray:
    interior = (t > tol) & (t < 1.0 - tol)
    wrong = ((labels == Label.WHITE) & (t <= tol)) | ((labels == Label.BLACK) & (t >= 1.0 - tol))
    return interior | wrong


class SampledCounterexample:
    """Counterexample search by sampling ``m`` pool indices with replacement.

    The draw for the k-th query (0-based) comes from
    ``numpy.random.default_rng([rng_seed, k])``, so answers depend only on the
    seed and the call ordinal. Labels obtained from ``label_oracle`` are
    cached across queries.
    """

    def __init__(self, label_oracle: LabelingOracle, pool: ArrayLike, m: int,
                 rng_seed: int = 0, tol: float = DEFAULT_TOL):
        if m < 0:
            raise NonPositiveInput("sample size m must be >= 0")
        self.pool = as_points(pool)
        if m > 0 and self.pool.shape[0] == 0:
            raise EmptyPool("cannot sample from an empty pool")
        self.label_oracle = label_oracle
        self.m = int(m)
        self.rng_seed = int(rng_seed)
        self.tol = tol
        self.calls = 0
        self._labels: dict[int, Label] = {}

    def _label(self, i: int) -> Label:
        if i not in self._labels:
            self._labels[i] = Label(self.label_oracle.query(i))
        return self._labels[i]

    def query(self, slab: Slab) -> Optional[int]:
        ordinal = self.calls
        self.calls += 1
        if self.m == 0:
            return None
        rng = np.random.default_rng([self.rng_seed, ordinal])
        draws = rng.integers(0, self.pool.shape[0], size=self.m)
        t = slab.params(self.pool[draws])
        for i, ti in zip(draws.tolist(), t.tolist()):
            if self.tol < ti < 1.0 - self.tol:
                return i
            lab = self._label(i)
            if (lab is Label.WHITE and ti <= self.tol) or (lab is Label.BLACK and ti >= 1.0 - self.tol):
                return i
        return None


def pool_labeling_oracle(data: Dataset) -> PoolLabelingOracle:
    return PoolLabelingOracle(data)


def exact_counterexample(data: Dataset, tol: float = DEFAULT_TOL) -> ExactCounterexample:
    return ExactCounterexample(data, tol)


def sampled_counterexample(label_oracle: LabelingOracle, pool: ArrayLike, m: int,
                           rng_seed: int = 0, tol: float = DEFAULT_TOL) -> SampledCounterexample:
    return SampledCounterexample(label_oracle, pool, m, rng_seed, tol)


def sample_size_for(rho: float, delta: float) -> int:
    """Smallest ``m`` with ``(1 - rho)**m <= delta`` under the bound ``(1-rho)**m <= exp(-rho*m)``."""
    if not (0 < rho <= 1 and 0 < delta < 1):
        raise NonPositiveInput("need 0 < rho <= 1 and 0 < delta < 1")
    return math.ceil(math.log(1.0 / delta) / rho)

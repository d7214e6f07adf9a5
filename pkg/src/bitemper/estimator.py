"""Self-normalized weighted estimator.

Estimates E_pi[g] as (sum w_i g(x_i)) / (sum w_i).  Works uniformly over
the three weight conventions (unit, multiplicity, inverse escape
probability); the convention only changes what the samplers record.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class _KahanSum:
    """Compensated accumulator; safe for 10^6+ terms of mixed magnitude."""

    total: float = 0.0
    comp: float = 0.0

    def add(self, x: float) -> None:
        y = x - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


@dataclass
class EstimatorAccumulator:
    """Mergeable accumulator for the self-normalized weighted average."""

    _wg: _KahanSum = field(default_factory=_KahanSum)
    _w: _KahanSum = field(default_factory=_KahanSum)
    n: int = 0

    @property
    def sum_wg(self) -> float:
        return self._wg.total

    @property
    def sum_w(self) -> float:
        return self._w.total

    def add(self, weight: float, g_value: float) -> None:
        if not (weight > 0.0) or not math.isfinite(weight):
            raise ValueError(f"weight must be finite and positive, got {weight}")
        self._wg.add(weight * g_value)
        self._w.add(weight)
        self.n += 1

    def estimate(self) -> float:
        if self.n < 1:
            raise ValueError("empty accumulator")
        return self._wg.total / self._w.total

    def merge(self, other: "EstimatorAccumulator") -> "EstimatorAccumulator":
        self._wg.add(other._wg.total)
        self._w.add(other._w.total)
        self.n += other.n
        return self


def accumulate(acc: EstimatorAccumulator, sample, g) -> EstimatorAccumulator:
    acc.add(sample.weight, float(g(sample)))
    return acc


def batch_means_se(values, weights, n_batches: int = 32) -> float:
    """Naive batch-means standard error of the self-normalized estimate.

    Splits the (value, weight) stream into contiguous batches, forms the
    per-batch weighted means, and returns their weighted spread scaled by
    1/sqrt(n_batches).  Shipped only to set test tolerances.
    """
    import numpy as np

    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if values.shape != weights.shape or values.ndim != 1:
        raise ValueError("values and weights must be equal-length 1-d arrays")
    n = values.size
    if n < 2 * n_batches:
        n_batches = max(2, n // 2)
    edges = np.linspace(0, n, n_batches + 1).astype(int)
    means = np.empty(n_batches)
    wsums = np.empty(n_batches)
    for k in range(n_batches):
        sl = slice(edges[k], edges[k + 1])
        w = weights[sl]
        wsums[k] = w.sum()
        means[k] = (w * values[sl]).sum() / wsums[k]
    grand = (wsums * means).sum() / wsums.sum()
    var = ((wsums / wsums.sum()) * (means - grand) ** 2).sum()
    return math.sqrt(var / n_batches) * math.sqrt(n_batches / (n_batches - 1))

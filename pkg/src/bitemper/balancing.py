"""Balancing functions and the adaptive bounding constant.

A balancing function h maps neighbor probability ratios to proposal weights
and satisfies h(r) = r * h(1/r).  The bounded construction caps an
unbounded basis f at a constant gamma so that the resulting weights are
valid escape probabilities (values in (0, 1]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

KINDS = ("min", "max", "sqrt", "bounded_sqrt")

_KIND_CODES = {
    "min": kernels.KIND_MIN,
    "max": kernels.KIND_MAX,
    "sqrt": kernels.KIND_SQRT,
    "bounded_sqrt": kernels.KIND_BOUNDED_SQRT,
}

# Basis functions usable in the bounded construction and the bound
# statistic; the value is the exponent applied to the ratio.
BASIS_EXPONENTS = {"sqrt": 0.5, "linear": 1.0}


@dataclass(frozen=True)
class BalancingSpec:
    """A concrete balancing function: kind plus bounding constant."""

    kind: str
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown balancing kind {self.kind!r}")
        if self.kind == "bounded_sqrt" and self.gamma < 1.0:
            raise ValueError("bounding constant below 1 has no use; gamma >= 1")

    @property
    def code(self) -> int:
        return _KIND_CODES[self.kind]

    @property
    def log_gamma(self) -> float:
        return math.log(self.gamma)

    @property
    def bounded(self) -> bool:
        """Whether outputs are guaranteed to lie in (0, 1]."""
        return self.kind in ("min", "bounded_sqrt")


def log_h(spec: BalancingSpec, log_r):
    return kernels.log_h(log_r, spec.code, spec.log_gamma)


def eval_balancing(spec: BalancingSpec, r: float) -> float:
    if not (r > 0.0) or not math.isfinite(r):
        raise ValueError(f"balancing functions need a finite positive ratio, got {r}")
    return math.exp(log_h(spec, math.log(r)))


def bound_from_f(f: str, gamma: float) -> BalancingSpec:
    """Balancing spec for h_gamma(r) = min{f_gamma(r), r*f_gamma(1/r)}.

    For the shipped basis f = sqrt this collapses to the piecewise
    min{1, r, sqrt(r)/gamma} form, which is what the returned spec
    evaluates; ``log_h_constructed`` keeps the two-sided closed form for
    cross-checks.
    """
    if gamma < 1.0:
        raise ValueError("bounding constant below 1 has no use; gamma >= 1")
    if f != "sqrt":
        raise ValueError(f"basis {f!r} not shipped (only 'sqrt')")
    return BalancingSpec("bounded_sqrt", gamma)


def log_h_constructed(f: str, gamma: float, log_r):
    """Two-sided bounded construction evaluated directly in log space.

    log f_gamma(r) = min(log gamma, c*log r) - log gamma for f(r) = r^c.
    """
    if f not in BASIS_EXPONENTS:
        raise ValueError(f"unknown basis {f!r}")
    c = BASIS_EXPONENTS[f]
    lg = math.log(gamma)
    log_r = np.asarray(log_r, dtype=np.float64)
    left = np.minimum(lg, c * log_r) - lg
    right = log_r + np.minimum(lg, -c * log_r) - lg
    return np.minimum(left, right)


def bound_statistic(log_ratios, f: str = "sqrt") -> float:
    """Largest basis value over both orientations of every neighbor ratio.

    With ratio exponent c this is exp(c * max |log ratio|); always >= 1.
    """
    if f not in BASIS_EXPONENTS:
        raise ValueError(f"unknown basis {f!r}")
    log_ratios = np.asarray(log_ratios, dtype=np.float64)
    if log_ratios.size == 0:
        raise ValueError("empty neighbor set")
    if not np.all(np.isfinite(log_ratios)):
        raise ValueError("non-finite log ratios")
    return math.exp(BASIS_EXPONENTS[f] * float(np.max(np.abs(log_ratios))))


@dataclass
class BoundTrace:
    """Nondecreasing history of the adaptive bounding constant."""

    gamma: float = 1.0
    frozen_at: int | None = None
    gammas: list = field(default_factory=list)
    _step: int = 0

    def __post_init__(self):
        if self.gamma < 1.0:
            self.gamma = 1.0
        if not self.gammas:
            self.gammas.append(self.gamma)

    @property
    def frozen(self) -> bool:
        return self.frozen_at is not None

    @property
    def log_gamma(self) -> float:
        return math.log(self.gamma)

    def update(self, candidate: float) -> None:
        """Raise the bound to ``candidate`` if larger; no-op once frozen."""
        self._step += 1
        if self.frozen:
            return
        if candidate > self.gamma:
            self.gamma = candidate
            self.gammas.append(candidate)

    def freeze(self) -> None:
        if not self.frozen:
            self.frozen_at = self._step

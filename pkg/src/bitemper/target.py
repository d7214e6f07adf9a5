"""Multimodal target distributions on {0,1}^p.

The un-normalized density is a sum of exponentially decaying bumps, one per
mode: pi(x) proportional to sum_j exp(-theta * d_j(x)) with d_j the Hamming
distance to mode j, optionally tempered by an inverse-temperature exponent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .state import BinaryState

EXACT_DIM_CAP = 22

_PATTERNS = (
    "alternating",
    "alternating_inv",
    "first_half",
    "second_half",
    "center_half",
    "center_half_inv",
)


class DimensionMismatchError(ValueError):
    pass


def _pattern_bits(pattern: str, p: int) -> np.ndarray:
    if pattern in ("first_half", "second_half", "center_half",
                   "center_half_inv") and p % 4 != 0:
        raise ValueError(f"pattern {pattern!r} needs p divisible by 4")
    idx = np.arange(p)
    if pattern == "alternating":
        bits = (idx % 2 == 0)
    elif pattern == "alternating_inv":
        bits = (idx % 2 == 1)
    elif pattern == "first_half":
        bits = idx < p // 2
    elif pattern == "second_half":
        bits = idx >= p // 2
    elif pattern == "center_half":
        bits = (idx >= p // 4) & (idx < 3 * p // 4)
    elif pattern == "center_half_inv":
        bits = (idx < p // 4) | (idx >= 3 * p // 4)
    else:
        raise ValueError(f"unknown mode pattern {pattern!r}; "
                         f"known patterns: {', '.join(_PATTERNS)}")
    return bits.astype(np.uint8)


def build_modes(p: int, spec) -> np.ndarray:
    """Build the (m, p) mode matrix from pattern ids or explicit bit-strings.

    Pattern-generated mode sets are checked to be pairwise at least p/2
    apart; explicit bit-strings are taken as given.
    """
    rows = []
    any_pattern = False
    for item in spec:
        if set(item) <= {"0", "1"}:
            if len(item) != p:
                raise DimensionMismatchError(
                    f"mode string of length {len(item)} does not match p={p}")
            rows.append(np.array([int(c) for c in item], dtype=np.uint8))
        else:
            any_pattern = True
            rows.append(_pattern_bits(item, p))
    modes = np.stack(rows)
    if any_pattern and len(rows) > 1:
        for a in range(len(rows)):
            for b in range(a + 1, len(rows)):
                d = int(np.sum(modes[a] != modes[b]))
                if d < p // 2:
                    raise ValueError(
                        f"pattern modes {a} and {b} are only {d} apart "
                        f"(need at least p/2 = {p // 2})")
    return modes


@dataclass(frozen=True)
class TargetSpec:
    """Immutable description of the target: modes, sharpness and tempering."""

    modes: np.ndarray            # (m, p) uint8
    theta: float
    beta: float = 1.0
    mode_keys: tuple = field(init=False)

    def __post_init__(self):
        modes = np.ascontiguousarray(np.asarray(self.modes, dtype=np.uint8))
        if modes.ndim != 2 or modes.shape[0] < 1 or modes.shape[1] < 1:
            raise ValueError("modes must be a nonempty (m, p) bit matrix")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        object.__setattr__(self, "modes", modes)
        keys = tuple(int(sum(int(b) << i for i, b in enumerate(row)))
                     for row in modes)
        object.__setattr__(self, "mode_keys", keys)

    @property
    def m(self) -> int:
        return self.modes.shape[0]

    @property
    def p(self) -> int:
        return self.modes.shape[1]

    def with_beta(self, beta: float) -> "TargetSpec":
        return TargetSpec(self.modes, self.theta, beta)

    def mode_states(self):
        return [BinaryState.from_array(row) for row in self.modes]


def _as_bits(x, p: int) -> np.ndarray:
    if isinstance(x, BinaryState):
        if x.p != p:
            raise DimensionMismatchError(
                f"state dimension {x.p} does not match target dimension {p}")
        return x.to_array()
    bits = np.ascontiguousarray(x, dtype=np.uint8)
    if bits.shape != (p,):
        raise DimensionMismatchError(
            f"state shape {bits.shape} does not match target dimension {p}")
    return bits


def mode_distances(t: TargetSpec, x) -> np.ndarray:
    bits = _as_bits(x, t.p)
    return np.sum(t.modes != bits[None, :], axis=1).astype(np.int64)


def log_target(x, t: TargetSpec) -> float:
    """Un-normalized log density beta * logsumexp_j(-theta * d_j(x))."""
    d = mode_distances(t, x)
    a = -t.theta * d
    amax = float(a.max())
    return t.beta * (amax + float(np.log(np.sum(np.exp(a - amax)))))


@dataclass
class DistanceCache:
    """Per-replica vector of Hamming distances to each mode.

    Kept in sync with the replica's state by +-1 updates on every accepted
    flip, so that neighbor ratios cost O(m) per neighbor instead of O(p*m).
    """

    distances: np.ndarray  # (m,) int64

    @classmethod
    def for_state(cls, t: TargetSpec, x) -> "DistanceCache":
        return cls(mode_distances(t, x))

    def apply_flip(self, t: TargetSpec, bits: np.ndarray, i: int) -> None:
        """Update for a flip of coordinate i; call before mutating ``bits``."""
        self.distances += np.where(t.modes[:, i] == bits[i], 1, -1)

    def copy(self) -> "DistanceCache":
        return DistanceCache(self.distances.copy())


def neighbor_log_ratios(x, cache: DistanceCache, t: TargetSpec) -> np.ndarray:
    """Log probability ratios for all p single-flip neighbors."""
    bits = _as_bits(x, t.p)
    out = np.empty(t.p, dtype=np.float64)
    kernels.log_ratios(bits, cache.distances, t.modes, t.theta, t.beta, out)
    return out


def exact_distribution(t: TargetSpec) -> np.ndarray:
    """Exact probabilities over all 2^p states, indexed by integer encoding.

    The encoding puts coordinate 0 in the least significant bit, matching
    ``BinaryState.to_int``.  Refuses dimensions above EXACT_DIM_CAP.
    """
    if t.p > EXACT_DIM_CAP:
        raise ValueError(
            f"exact enumeration refused for p={t.p} (cap is {EXACT_DIM_CAP})")
    n = 1 << t.p
    states = np.arange(n, dtype=np.uint64)
    a = np.empty((n, t.m))
    for j, key in enumerate(t.mode_keys):
        d = np.bitwise_count(states ^ np.uint64(key)).astype(np.float64)
        a[:, j] = -t.theta * d
    amax = a.max(axis=1)
    logw = t.beta * (amax + np.log(np.exp(a - amax[:, None]).sum(axis=1)))
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def separated_normalizer(m: int, theta: float, p: int) -> float:
    """Closed-form normalizer m * (1 + e^-theta)^p for well-separated modes."""
    return m * (1.0 + np.exp(-theta)) ** p


class UniformProposal:
    """Uniform proposal over the p single-flip neighbors; Q(y|x) = 1/p."""

    def __init__(self, p: int):
        if p < 1:
            raise ValueError("p must be positive")
        self.p = p

    def prob(self) -> float:
        return 1.0 / self.p

    def sample_flip(self, rng) -> int:
        return int(rng.integers(self.p))

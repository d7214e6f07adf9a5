"""Single-replica step kernels for the compared algorithms.

Seven step kinds share one replica representation.  The informed kinds
evaluate the target on the whole flip neighborhood each step (p evaluations);
the single-proposal kinds evaluate it once.  Weight conventions:

    mh, ss_iit          unit weight 1
    mh_mult, aiit       multiplicity 1 + Geometric(Z)
    rf_mh, iit          direct weight 1 / Z
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .balancing import BASIS_EXPONENTS, BoundTrace
from .state import BinaryState
from .target import DistanceCache, TargetSpec, mode_distances

KINDS = ("mh", "mh_mult", "rf_mh", "iit", "aiit", "aiit_fast", "ss_iit")

WEIGHT_KIND = {
    "mh": "unit",
    "ss_iit": "unit",
    "mh_mult": "multiplicity",
    "aiit": "multiplicity",
    "aiit_fast": "multiplicity",
    "rf_mh": "inverse_z",
    "iit": "inverse_z",
}

# kinds whose step looks at the full neighborhood
INFORMED_KINDS = ("mh_mult", "rf_mh", "iit", "aiit", "aiit_fast")
# kinds that adapt the bounding constant
ADAPTIVE_KINDS = ("aiit", "aiit_fast", "ss_iit")

_CHOICE_CODE = {
    "mh_mult": kernels.KIND_MIN,
    "rf_mh": kernels.KIND_MIN,
    "iit": kernels.KIND_SQRT,
    "aiit": kernels.KIND_BOUNDED_SQRT,
}


class AbsorbingStateError(RuntimeError):
    """All neighbor weights underflowed to zero; the chain cannot escape."""

    def __init__(self, key: int):
        super().__init__(f"zero escape probability at state key {key}")
        self.key = key


@dataclass
class WeightedSample:
    key: int
    weight: float
    kind: str

    def state(self, p: int) -> BinaryState:
        return BinaryState.from_int(self.key, p)


@dataclass
class ReplicaStats:
    pi_evals: int = 0
    rf_steps: int = 0
    proposals: int = 0


@dataclass
class ReplicaState:
    """Mutable per-replica chain state; owned by one worker at a time."""

    bits: np.ndarray
    key: int
    cache: DistanceCache
    bound: BoundTrace
    rng: np.random.Generator
    stats: ReplicaStats = field(default_factory=ReplicaStats)
    adapt_basis: str = "linear"
    cum_weight: float = 0.0
    _lr_buf: np.ndarray | None = None

    @classmethod
    def create(cls, t: TargetSpec, rng: np.random.Generator,
               start: BinaryState | None = None, gamma0: float = 1.0,
               adapt_basis: str = "linear") -> "ReplicaState":
        if adapt_basis not in BASIS_EXPONENTS:
            raise ValueError(f"unknown bound basis {adapt_basis!r}")
        if start is None:
            bits = rng.integers(0, 2, t.p, dtype=np.uint8)
        else:
            bits = start.to_array()
        bits = np.ascontiguousarray(bits)
        key = int(sum(int(b) << i for i, b in enumerate(bits)))
        return cls(
            bits=bits,
            key=key,
            cache=DistanceCache(mode_distances(t, bits)),
            bound=BoundTrace(gamma=gamma0),
            rng=rng,
            adapt_basis=adapt_basis,
        )

    @property
    def lr_buf(self) -> np.ndarray:
        if self._lr_buf is None or self._lr_buf.size != self.bits.size:
            self._lr_buf = np.empty(self.bits.size, dtype=np.float64)
        return self._lr_buf

    def jump(self, t: TargetSpec, i: int) -> None:
        self.cache.apply_flip(t, self.bits, i)
        self.bits[i] ^= 1
        self.key ^= 1 << i
        self.stats.rf_steps += 1

    def exchange_state(self, other: "ReplicaState") -> None:
        """Swap chain states (bits, key, distance cache) between replicas."""
        self.bits, other.bits = other.bits, self.bits
        self.key, other.key = other.key, self.key
        self.cache, other.cache = other.cache, self.cache
        self._lr_buf = None
        other._lr_buf = None

    def state(self) -> BinaryState:
        return BinaryState.from_array(self.bits)


def sample_multiplicity(z: float, rng: np.random.Generator) -> int:
    """Draw 1 + Geometric(z) by inversion; mean 1/z."""
    if not (0.0 < z <= 1.0):
        raise ValueError(f"escape probability must be in (0, 1], got {z}")
    if z >= 1.0:
        return 1
    u = 1.0 - rng.random()  # in (0, 1]
    return 1 + int(math.log(u) / math.log1p(-z))


def _compute_log_ratios(r: ReplicaState, t: TargetSpec) -> np.ndarray:
    out = r.lr_buf
    kernels.log_ratios(r.bits, r.cache.distances, t.modes, t.theta, t.beta, out)
    r.stats.pi_evals += t.p
    return out


def escape_probability(r: ReplicaState, t: TargetSpec, b) -> float:
    """Mean balancing weight over the neighborhood (Q-weighted escape prob)."""
    lr = _compute_log_ratios(r, t)
    z = float(np.mean(np.exp(kernels.log_h(lr, b.code, b.log_gamma))))
    if z <= 0.0:
        raise AbsorbingStateError(r.key)
    return z


def _maybe_adapt(r: ReplicaState, max_abs_lr: float) -> None:
    coeff = BASIS_EXPONENTS[r.adapt_basis]
    r.bound.update(math.exp(coeff * max_abs_lr))


def propose_informed(r: ReplicaState, t: TargetSpec, kind: str):
    """Full-neighborhood proposal: returns (flip index, escape probability).

    Adaptive kinds raise the bounding constant from the neighborhood before
    weighting it, so every ratio ends up on the middle branch of the bounded
    function.  Does not move the chain; call ``r.jump`` with the index.
    """
    lr = _compute_log_ratios(r, t)
    r.stats.proposals += 1
    if kind in ("aiit", "aiit_fast") and not r.bound.frozen:
        _maybe_adapt(r, float(np.max(np.abs(lr))))
    u = r.rng.random()
    if kind == "aiit_fast":
        # bound cancels in the choice; divide the mean sqrt weight once
        choice, z_raw, _ = kernels.informed_step(lr, kernels.KIND_SQRT, 0.0, u)
        z = z_raw * math.exp(-r.bound.log_gamma)
    else:
        code = _CHOICE_CODE[kind]
        log_gamma = r.bound.log_gamma if kind == "aiit" else 0.0
        choice, z, _ = kernels.informed_step(lr, code, log_gamma, u)
    if choice < 0 or z <= 0.0:
        raise AbsorbingStateError(r.key)
    return choice, z


def step_naive_iit(r: ReplicaState, t: TargetSpec) -> WeightedSample:
    key = r.key
    choice, z = propose_informed(r, t, "iit")
    r.jump(t, choice)
    return WeightedSample(key, 1.0 / z, "inverse_z")


def step_rf_mh(r: ReplicaState, t: TargetSpec) -> WeightedSample:
    key = r.key
    choice, z = propose_informed(r, t, "rf_mh")
    r.jump(t, choice)
    return WeightedSample(key, 1.0 / z, "inverse_z")


def _step_multiplicity(r: ReplicaState, t: TargetSpec, kind: str) -> WeightedSample:
    key = r.key
    choice, z = propose_informed(r, t, kind)
    m = sample_multiplicity(min(z, 1.0), r.rng)
    r.jump(t, choice)
    return WeightedSample(key, float(m), "multiplicity")


def step_mh_mult(r: ReplicaState, t: TargetSpec) -> WeightedSample:
    return _step_multiplicity(r, t, "mh_mult")


def step_aiit(r: ReplicaState, t: TargetSpec) -> WeightedSample:
    return _step_multiplicity(r, t, "aiit")


def step_aiit_fast(r: ReplicaState, t: TargetSpec) -> WeightedSample:
    return _step_multiplicity(r, t, "aiit_fast")


def _single_proposal(r: ReplicaState, t: TargetSpec, adapt: bool) -> WeightedSample:
    key = r.key
    i = int(r.rng.integers(t.p))
    lr = kernels.single_log_ratio(r.bits, r.cache.distances, t.modes,
                                  t.theta, t.beta, i)
    r.stats.pi_evals += 1
    r.stats.proposals += 1
    if adapt and not r.bound.frozen:
        _maybe_adapt(r, abs(lr))
    if adapt:
        lh = kernels.log_h(lr, kernels.KIND_BOUNDED_SQRT, r.bound.log_gamma)
    else:
        lh = kernels.log_h(lr, kernels.KIND_MIN, 0.0)
    u = 1.0 - r.rng.random()
    if math.log(u) < lh:
        r.jump(t, i)
    return WeightedSample(key, 1.0, "unit")


def step_mh(r: ReplicaState, t: TargetSpec) -> WeightedSample:
    return _single_proposal(r, t, adapt=False)


def step_ssiit(r: ReplicaState, t: TargetSpec) -> WeightedSample:
    return _single_proposal(r, t, adapt=True)


STEP_FUNCS = {
    "mh": step_mh,
    "ss_iit": step_ssiit,
    "mh_mult": step_mh_mult,
    "aiit": step_aiit,
    "aiit_fast": step_aiit_fast,
    "rf_mh": step_rf_mh,
    "iit": step_naive_iit,
}


def step(r: ReplicaState, t: TargetSpec, kind: str) -> WeightedSample:
    try:
        fn = STEP_FUNCS[kind]
    except KeyError:
        raise ValueError(f"unknown sampler kind {kind!r}") from None
    return fn(r, t)


def spawn_rngs(master_seed: int, n: int) -> list:
    """Independent counter-based streams split from one master seed."""
    seqs = np.random.SeedSequence(master_seed).spawn(n)
    return [np.random.Generator(np.random.Philox(s)) for s in seqs]

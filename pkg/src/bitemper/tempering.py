"""Non-reversible parallel tempering over a ladder of tempered replicas.

Each replica runs its assigned step kind between swap barriers.
Multiplicity- and unit-weight replicas advance until their recorded weights
sum to exactly L0 (truncating the last multiplicity and deferring that
jump); direct-weight replicas advance a fixed iteration count.  Swap rounds
alternate even/odd adjacent pairs deterministically.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, samplers
from .balancing import BalancingSpec
from .diagnostics import HitRecord, RunSummary, tvd
from .samplers import (WEIGHT_KIND, ReplicaState, WeightedSample,
                       propose_informed, sample_multiplicity, step)
from .state import BinaryState
from .target import EXACT_DIM_CAP, TargetSpec, exact_distribution

TVD_CHECKPOINT_FACTOR = 1.5


@dataclass(frozen=True)
class ReplicaLadder:
    """Inverse temperatures plus per-replica algorithm assignment."""

    betas: tuple
    kinds: tuple
    L0: int = 1
    iters_between_swaps: int = 1

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        kinds = tuple(self.kinds)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "kinds", kinds)
        if len(betas) != len(kinds) or not betas:
            raise ValueError("betas and kinds must be nonempty, equal length")
        if any(b2 >= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("betas must be strictly decreasing")
        if betas[-1] < 0:
            raise ValueError("betas must be nonnegative")
        for k in kinds:
            if k not in samplers.KINDS:
                raise ValueError(f"unknown sampler kind {k!r}")
        # mixed ladders put the expensive full-neighborhood kinds at the
        # coldest (largest beta) rungs
        seen_single = False
        for k in kinds:
            informed = k in samplers.INFORMED_KINDS
            if informed and seen_single:
                raise ValueError(
                    "informed kinds must precede single-step kinds in a ladder")
            seen_single = seen_single or not informed
        if self.L0 < 1 or self.iters_between_swaps < 1:
            raise ValueError("budgets must be positive")

    @property
    def size(self) -> int:
        return len(self.betas)

    @property
    def direct_weight(self) -> bool:
        """Whether any rung records inverse-Z weights (Z-corrected swaps)."""
        return any(WEIGHT_KIND[k] == "inverse_z" for k in self.kinds)


@dataclass
class SwapRecord:
    round: int
    pair: tuple
    probability: float
    accepted: bool
    parity: str


def _log_pi(t: TargetSpec, bits: np.ndarray) -> float:
    """Un-tempered log target (beta = 1)."""
    d = np.sum(t.modes != bits[None, :], axis=1)
    a = -t.theta * d
    amax = float(a.max())
    return amax + float(np.log(np.sum(np.exp(a - amax))))


def swap_prob_standard(xi, xj, beta_i: float, beta_j: float,
                       t: TargetSpec) -> float:
    """min{1, exp((beta_j - beta_i)(log pi(x_i) - log pi(x_j)))}."""
    if beta_i == beta_j:
        raise ValueError("swap needs distinct inverse temperatures")
    log_a = (beta_j - beta_i) * (_log_pi(t, xi) - _log_pi(t, xj))
    return min(1.0, math.exp(min(log_a, 0.0)))


def swap_prob_z_corrected(log_zi_xi: float, log_zi_xj: float,
                          log_zj_xi: float, log_zj_xj: float,
                          xi, xj, beta_i: float, beta_j: float,
                          t: TargetSpec) -> float:
    """Swap probability preserving the product of Z-weighted measures.

    The Z factors are escape probabilities of each state under each rung's
    tempered target and balancing function (log scale).
    """
    lpi, lpj = _log_pi(t, xi), _log_pi(t, xj)
    log_a = ((beta_j - beta_i) * (lpi - lpj)
             + log_zj_xi + log_zi_xj - log_zi_xi - log_zj_xj)
    return min(1.0, math.exp(min(log_a, 0.0)))


def replica_balancing(kind: str, gamma: float) -> BalancingSpec:
    """The balancing function a replica of this kind is currently using."""
    if kind in ("aiit", "aiit_fast", "ss_iit"):
        return BalancingSpec("bounded_sqrt", max(1.0, gamma))
    if kind == "iit":
        return BalancingSpec("sqrt")
    return BalancingSpec("min")


def _log_escape(r: ReplicaState, t: TargetSpec, spec: BalancingSpec) -> float:
    lr = samplers._compute_log_ratios(r, t)
    lh = kernels.log_h(lr, spec.code, spec.log_gamma)
    m = float(np.max(lh))
    z = math.exp(m) * float(np.sum(np.exp(lh - m))) / t.p
    if z <= 0.0:
        raise samplers.AbsorbingStateError(r.key)
    return math.log(z)


def advance_to_budget(r: ReplicaState, t: TargetSpec, kind: str, L0: int,
                      collect: bool = True):
    """Advance until recorded weights sum to exactly L0.

    Multiplicity kinds truncate the final draw: when the drawn multiplicity
    covers the remaining budget, the remainder is recorded and the jump is
    deferred (the chain stays put; the next window resumes from the same
    state).  Returns ``(samples or None, total weight, iterations)``.
    """
    wk = WEIGHT_KIND[kind]
    if wk == "inverse_z":
        raise ValueError("direct-weight kinds use advance_iterations")
    if wk == "unit":
        if collect:
            out = [step(r, t, kind) for _ in range(L0)]
            return out, float(L0), L0
        _advance_single_batch(r, t, kind, L0)
        return None, float(L0), L0
    samples = [] if collect else None
    remaining = L0
    iters = 0
    while remaining > 0:
        key = r.key
        choice, z = propose_informed(r, t, kind)
        m = sample_multiplicity(min(z, 1.0), r.rng)
        iters += 1
        if m >= remaining:
            w = remaining
            remaining = 0
            # jump deferred: the chain stays in the current state
        else:
            w = m
            remaining -= m
            r.jump(t, choice)
        if collect:
            samples.append(WeightedSample(key, float(w), "multiplicity"))
    return samples, float(L0), iters


def _advance_single_batch(r: ReplicaState, t: TargetSpec, kind: str,
                          n: int) -> None:
    """Vector path for unit-weight replicas whose samples are not retained."""
    u_prop = r.rng.random(n)
    u_acc = 1.0 - r.rng.random(n)
    adapt = kind == "ss_iit" and not r.bound.frozen
    code = kernels.KIND_BOUNDED_SQRT if kind == "ss_iit" else kernels.KIND_MIN
    coeff = samplers.BASIS_EXPONENTS[r.adapt_basis]
    log_gamma, n_acc = kernels.ssiit_advance(
        r.bits, r.cache.distances, t.modes, t.theta, t.beta,
        r.bound.log_gamma, int(adapt), coeff, u_prop, u_acc, code)
    if adapt:
        r.bound.update(math.exp(log_gamma))
    r.key = int(sum(int(b) << i for i, b in enumerate(r.bits)))
    r.stats.pi_evals += n
    r.stats.proposals += n
    r.stats.rf_steps += n_acc


def advance_iterations(r: ReplicaState, t: TargetSpec, kind: str, iters: int,
                       collect: bool = True):
    """Fixed-iteration advance for direct-weight (inverse-Z) kinds."""
    samples = [] if collect else None
    total = 0.0
    for _ in range(iters):
        s = step(r, t, kind)
        total += s.weight
        if collect:
            samples.append(s)
    return samples, total, iters


def deo_round(ladder: ReplicaLadder, replicas, t: TargetSpec,
              rng: np.random.Generator, swap_rule: str, round_index: int,
              parity: str):
    """Attempt swaps on all disjoint adjacent pairs of the given parity.

    Accepted swaps exchange states (and caches); inverse temperatures stay
    with their slots.  Z-corrected swaps evaluate four escape probabilities
    per attempted pair, charged to the replicas' evaluation budgets.
    """
    records = []
    start = 0 if parity == "even" else 1
    for i in range(start, ladder.size - 1, 2):
        j = i + 1
        ri, rj = replicas[i], replicas[j]
        if swap_rule == "standard":
            prob = swap_prob_standard(ri.bits, rj.bits, ladder.betas[i],
                                      ladder.betas[j], t)
        elif swap_rule == "z_corrected":
            ti = t.with_beta(ladder.betas[i])
            tj = t.with_beta(ladder.betas[j])
            spec_i = replica_balancing(ladder.kinds[i], ri.bound.gamma)
            spec_j = replica_balancing(ladder.kinds[j], rj.bound.gamma)
            lzi_xi = _log_escape(ri, ti, spec_i)
            lzj_xj = _log_escape(rj, tj, spec_j)
            # cross terms: each state evaluated under the other rung
            saved = (rj.bits, rj.key, rj.cache)
            rj.bits, rj.key, rj.cache = ri.bits, ri.key, ri.cache
            lzj_xi = _log_escape(rj, tj, spec_j)
            rj.bits, rj.key, rj.cache = saved
            saved = (ri.bits, ri.key, ri.cache)
            ri.bits, ri.key, ri.cache = rj.bits, rj.key, rj.cache
            lzi_xj = _log_escape(ri, ti, spec_i)
            ri.bits, ri.key, ri.cache = saved
            prob = swap_prob_z_corrected(
                lzi_xi, lzi_xj, lzj_xi, lzj_xj, ri.bits, rj.bits,
                ladder.betas[i], ladder.betas[j], t)
        else:
            raise ValueError(f"unknown swap rule {swap_rule!r}")
        accepted = rng.random() < prob
        if accepted:
            ri.exchange_state(rj)
        records.append(SwapRecord(round_index, (i, j), prob, accepted, parity))
    return records


@dataclass
class PTOptions:
    """Knobs for one seeded parallel-tempering run."""

    rounds: int
    swap_rule: str = "standard"
    gamma0: float = 1.0
    adapt: bool = True
    freeze_after_burnin: bool = True
    adapt_basis: str = "linear"
    burnin_multiplicity: int = 0
    burnin_iters: int = 0
    record_tvd: bool = False
    record_hits: bool = True
    stop_when_all_modes_found: bool = False
    record_wall_clock: bool = False
    algorithm_label: str = ""
    start_at_mode: int | None = None


def run_pt(t: TargetSpec, ladder: ReplicaLadder, opts: PTOptions,
           seed: int) -> RunSummary:
    """One seeded PT run: alternating budget windows and DEO swap rounds.

    Replica 0 (largest beta) is the measurement chain: its retained samples
    feed the TVD histogram and the mode-hitting record.
    """
    t0 = time.perf_counter()
    rngs = samplers.spawn_rngs(seed, ladder.size + 1)
    swap_rng = rngs[-1]
    replicas = []
    for i in range(ladder.size):
        start = None
        if opts.start_at_mode is not None:
            start = BinaryState.from_array(t.modes[opts.start_at_mode])
        # single-step bound candidates come from one proposed pair and use
        # the sqrt basis; full-neighborhood kinds use the configured basis
        basis = "sqrt" if ladder.kinds[i] == "ss_iit" else opts.adapt_basis
        r = ReplicaState.create(t, rngs[i], start=start, gamma0=opts.gamma0,
                                adapt_basis=basis)
        if not opts.adapt:
            r.bound.freeze()
        replicas.append(r)
    targets = [t.with_beta(b) for b in ladder.betas]
    summary = RunSummary(seed=seed, algorithm=opts.algorithm_label,
                         rounds_run=0)
    summary.window_weights = [[] for _ in range(ladder.size)]
    summary.window_iters = [[] for _ in range(ladder.size)]

    _burn_in(ladder, replicas, targets, opts)
    if opts.adapt and opts.freeze_after_burnin and (
            opts.burnin_multiplicity or opts.burnin_iters):
        for r in replicas:
            r.bound.freeze()

    exact = None
    histogram: dict = {}
    hist_weight = 0.0
    next_checkpoint = float(ladder.L0)
    if opts.record_tvd:
        if t.p > EXACT_DIM_CAP:
            raise ValueError("TVD recording needs an enumerable target")
        exact = exact_distribution(t)
    mode_hits = {i: False for i in range(t.m)} if opts.record_hits else {}
    mode_key_to_index = {k: i for i, k in enumerate(t.mode_keys)}

    for rnd in range(opts.rounds):
        pending_hits = []
        for i in range(ladder.size):
            kind = ladder.kinds[i]
            collect = i == 0 and (opts.record_tvd or opts.record_hits)
            if WEIGHT_KIND[kind] == "inverse_z":
                out, total, iters = advance_iterations(
                    replicas[i], targets[i], kind,
                    ladder.iters_between_swaps, collect)
            else:
                out, total, iters = advance_to_budget(
                    replicas[i], targets[i], kind, ladder.L0, collect)
            summary.window_weights[i].append(total)
            summary.window_iters[i].append(iters)
            if i == 0 and out is not None:
                for s in out:
                    if opts.record_tvd:
                        histogram[s.key] = histogram.get(s.key, 0.0) + s.weight
                        hist_weight += s.weight
                    if opts.record_hits:
                        mi = mode_key_to_index.get(s.key)
                        if mi is not None and not mode_hits[mi]:
                            mode_hits[mi] = True
                            pending_hits.append(mi)
        evals_now = sum(r.stats.pi_evals for r in replicas)
        seconds = (time.perf_counter() - t0) if opts.record_wall_clock else None
        for mi in pending_hits:
            summary.hits.append(HitRecord(mi, rnd, evals_now, seconds))
        if opts.record_tvd and hist_weight >= next_checkpoint:
            summary.tvd_curve.append(
                (int(hist_weight), tvd(histogram, exact)))
            while next_checkpoint <= hist_weight:
                next_checkpoint *= TVD_CHECKPOINT_FACTOR
        if ladder.size > 1:
            parity = "even" if rnd % 2 == 0 else "odd"
            summary.swap_records.extend(
                deo_round(ladder, replicas, t, swap_rng, opts.swap_rule,
                          rnd, parity))
        summary.rounds_run = rnd + 1
        if (opts.stop_when_all_modes_found and opts.record_hits
                and all(mode_hits.values())):
            break

    summary.all_modes_found = bool(mode_hits) and all(mode_hits.values())
    summary.gamma_final = [r.bound.gamma for r in replicas]
    summary.eval_counts = [r.stats.pi_evals for r in replicas]
    if opts.record_wall_clock:
        summary.wall_seconds = time.perf_counter() - t0
    return summary


def _burn_in(ladder: ReplicaLadder, replicas, targets, opts: PTOptions) -> None:
    """Discarded pre-swap segment during which the bound adapts.

    Multiplicity kinds burn in until cumulative multiplicity reaches the
    configured threshold; other kinds run a fixed iteration count.
    """
    for i in range(ladder.size):
        kind = ladder.kinds[i]
        r = replicas[i]
        if WEIGHT_KIND[kind] == "multiplicity" and opts.burnin_multiplicity:
            acc = 0.0
            while acc < opts.burnin_multiplicity:
                acc += step(r, targets[i], kind).weight
        elif WEIGHT_KIND[kind] != "multiplicity" and opts.burnin_iters:
            if WEIGHT_KIND[kind] == "unit":
                _advance_single_batch(r, targets[i], kind, opts.burnin_iters)
            else:
                advance_iterations(r, targets[i], kind, opts.burnin_iters,
                                   collect=False)

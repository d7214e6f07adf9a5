"""Run diagnostics and exact brute-force oracles.

Holds the per-run summary container, total variation distance against
enumerated targets, mode-hitting records, accounting tables, the exact
transition-matrix oracle used by the stationarity tests, and the CSV
writers that form the toolkit's external interface.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import kernels
from .balancing import BalancingSpec
from .target import EXACT_DIM_CAP, TargetSpec, exact_distribution

ORACLE_DIM_CAP = 10

# which kinds move every step (jump chains) vs propose-and-maybe-stay
JUMP_KINDS = ("rf_mh", "mh_mult", "iit", "aiit", "aiit_fast")
SINGLE_KINDS = ("mh", "ss_iit")


@dataclass
class HitRecord:
    mode_index: int
    round: int
    evals: int
    seconds: float | None = None


@dataclass
class RunSummary:
    """Everything one seeded run reports back to the harness."""

    seed: int
    algorithm: str
    rounds_run: int
    tvd_curve: list = field(default_factory=list)      # (checkpoint, value)
    hits: list = field(default_factory=list)           # HitRecord
    swap_records: list = field(default_factory=list)   # SwapRecord
    window_weights: list = field(default_factory=list)  # per replica: [sums]
    window_iters: list = field(default_factory=list)   # per replica: [counts]
    gamma_final: list = field(default_factory=list)
    eval_counts: list = field(default_factory=list)
    all_modes_found: bool = False
    wall_seconds: float | None = None

    @property
    def avg_rf_steps(self) -> list:
        """Mean algorithm iterations per inter-swap window, per replica."""
        return [float(np.mean(c)) if c else 0.0 for c in self.window_iters]

    def swap_rates(self) -> dict:
        """Accepted swaps per round for each adjacent pair index.

        Even/odd alternation attempts each pair every other round, so this
        per-round rate is roughly half the per-attempt acceptance rate.
        """
        accepts: dict = {}
        for rec in self.swap_records:
            i = rec.pair[0]
            accepts[i] = accepts.get(i, 0) + int(rec.accepted)
        rounds = max(1, self.rounds_run)
        return {i: accepts[i] / rounds for i in sorted(accepts)}


def tvd(empirical, exact: np.ndarray) -> float:
    """Half the L1 distance between a weighted histogram and exact probs.

    ``empirical`` is either a dict mapping integer state keys to weights or
    a dense array aligned with ``exact``; it is normalized here.
    """
    n = exact.shape[0]
    if isinstance(empirical, dict):
        dense = np.zeros(n)
        for key, w in empirical.items():
            if not 0 <= key < n:
                raise ValueError(f"state key {key} outside enumerated space")
            dense[key] = w
    else:
        dense = np.asarray(empirical, dtype=np.float64)
        if dense.shape != exact.shape:
            raise ValueError("empirical and exact histograms differ in shape")
    total = dense.sum()
    if total <= 0:
        raise ValueError("empty empirical histogram")
    return 0.5 * float(np.abs(dense / total - exact).sum())


def mode_hitting(keys, mode_keys) -> dict:
    """First index at which each mode key appears in the trace (None if never)."""
    first: dict = {k: None for k in mode_keys}
    remaining = set(mode_keys)
    for idx, key in enumerate(keys):
        if key in remaining:
            first[key] = idx
            remaining.discard(key)
            if not remaining:
                break
    return {i: first[k] for i, k in enumerate(mode_keys)}


def _all_log_ratios(t: TargetSpec) -> np.ndarray:
    """(2^p, p) matrix of log pi^beta(s^i) - log pi^beta(s) by enumeration."""
    n = 1 << t.p
    states = np.arange(n, dtype=np.uint64)
    a = np.empty((n, t.m))
    for j, key in enumerate(t.mode_keys):
        a[:, j] = -t.theta * np.bitwise_count(
            states ^ np.uint64(key)).astype(np.float64)
    amax = a.max(axis=1)
    logpi = t.beta * (amax + np.log(np.exp(a - amax[:, None]).sum(axis=1)))
    lr = np.empty((n, t.p))
    for i in range(t.p):
        lr[:, i] = logpi[np.arange(n) ^ (1 << i)] - logpi
    return lr


def _oracle_spec(kind: str, b: BalancingSpec | None) -> BalancingSpec:
    if kind in ("mh", "rf_mh", "mh_mult"):
        return BalancingSpec("min")
    if kind == "iit":
        return b if b is not None and b.kind == "sqrt" else BalancingSpec("sqrt")
    if b is None:
        raise ValueError(f"kind {kind!r} needs an explicit balancing spec")
    return b


def kernel_oracle(kind: str, t: TargetSpec, b: BalancingSpec | None = None):
    """Exact transition matrix and stationary distribution of one step kind.

    The balancing constant is treated as frozen.  Jump-chain kernels are
    bipartite on the flip graph, so the stationary vector comes from a
    direct linear solve of the balance equations rather than iteration.
    """
    if t.p > ORACLE_DIM_CAP:
        raise ValueError(f"oracle refused for p={t.p} (cap {ORACLE_DIM_CAP})")
    if kind not in JUMP_KINDS + SINGLE_KINDS:
        raise ValueError(f"unknown sampler kind {kind!r}")
    spec = _oracle_spec(kind, b)
    lr = _all_log_ratios(t)
    h = np.exp(kernels.log_h(lr, spec.code, spec.log_gamma))
    n = 1 << t.p
    P = np.zeros((n, n))
    cols = np.arange(n)[:, None] ^ (1 << np.arange(t.p))[None, :]
    if kind in SINGLE_KINDS:
        probs = h / t.p
        stay = 1.0 - probs.sum(axis=1)
    else:
        probs = h / h.sum(axis=1, keepdims=True)
        stay = np.zeros(n)
    for s in range(n):
        P[s, cols[s]] = probs[s]
        P[s, s] += stay[s]
    pi = stationary_distribution(P)
    return P, pi


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 exactly (handles periodic chains)."""
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def escape_probabilities(t: TargetSpec, b: BalancingSpec) -> np.ndarray:
    """Z_h(s) for every enumerated state under the tempered target."""
    lr = _all_log_ratios(t)
    return np.exp(kernels.log_h(lr, b.code, b.log_gamma)).mean(axis=1)


def expected_stationary(kind: str, t: TargetSpec,
                        b: BalancingSpec | None = None) -> np.ndarray:
    """Closed-form stationary law: pi^beta, or Z_h * pi^beta for jump chains."""
    base = exact_distribution(t)
    if kind in SINGLE_KINDS:
        return base
    z = escape_probabilities(t, _oracle_spec(kind, b))
    w = z * base
    return w / w.sum()


def pt_product_oracle(t: TargetSpec, beta_cold: float, beta_hot: float,
                      spec_cold: BalancingSpec, spec_hot: BalancingSpec,
                      swap_rule: str):
    """Exact two-replica PT round kernel on jump chains and its stationary law.

    One round = each replica takes one rejection-free step, then the single
    adjacent swap is attempted.  Because each replica flips exactly one bit
    per round, the combined bit-count parity is conserved and the product
    chain splits into two closed classes; the stationary solve and the
    reference measure are therefore both conditioned on the even-parity
    class.  Returns (round kernel as sparse matrix, class-conditioned
    stationary distribution over state pairs, class-conditioned product
    reference measure), the distributions embedded in the full pair space.
    """
    if t.p > 6:
        raise ValueError("two-replica enumeration capped at p=6")
    n = 1 << t.p
    kernels_ = []
    refs = []
    for beta, spec in ((beta_cold, spec_cold), (beta_hot, spec_hot)):
        tb = t.with_beta(beta)
        K, _ = kernel_oracle("rf_mh" if spec.kind == "min" else "aiit", tb,
                             spec if spec.kind != "min" else None)
        kernels_.append(scipy.sparse.csr_matrix(K))
        z = escape_probabilities(tb, spec)
        ref = z * exact_distribution(tb)
        refs.append(ref / ref.sum())
    move = scipy.sparse.kron(kernels_[0], kernels_[1], format="csr")

    # swap acceptance for every pair (s1, s2); pair index = s1 * n + s2
    logpi1 = np.log(exact_distribution(t.with_beta(beta_cold)))
    logpi2 = np.log(exact_distribution(t.with_beta(beta_hot)))
    s1 = np.repeat(np.arange(n), n)
    s2 = np.tile(np.arange(n), n)
    log_ratio = (logpi1[s2] - logpi1[s1]) + (logpi2[s1] - logpi2[s2])
    if swap_rule == "z_corrected":
        z1 = escape_probabilities(t.with_beta(beta_cold), spec_cold)
        z2 = escape_probabilities(t.with_beta(beta_hot), spec_hot)
        log_ratio += (np.log(z1[s2]) - np.log(z1[s1])
                      + np.log(z2[s1]) - np.log(z2[s2]))
    elif swap_rule != "standard":
        raise ValueError(f"unknown swap rule {swap_rule!r}")
    acc = np.minimum(1.0, np.exp(log_ratio))
    swapped = s2 * n + s1
    idx = np.arange(n * n)
    swap = scipy.sparse.csr_matrix(
        (np.concatenate([1.0 - acc, acc]),
         (np.concatenate([idx, idx]), np.concatenate([idx, swapped]))),
        shape=(n * n, n * n))
    round_kernel = (move @ swap).tocsr()

    parity = (np.bitwise_count(s1.astype(np.uint64))
              + np.bitwise_count(s2.astype(np.uint64))) % 2
    keep = np.flatnonzero(parity == 0)
    K = round_kernel[keep][:, keep]
    m_ = keep.size
    A = (K.T - scipy.sparse.identity(m_, format="csr")).tolil()
    A[-1, :] = 1.0
    rhs = np.zeros(m_)
    rhs[-1] = 1.0
    pi_class = scipy.sparse.linalg.spsolve(A.tocsr(), rhs)
    pi_class = np.clip(pi_class, 0.0, None)
    pi = np.zeros(n * n)
    pi[keep] = pi_class / pi_class.sum()
    ref_full = np.outer(refs[0], refs[1]).ravel()
    product_ref = np.zeros(n * n)
    product_ref[keep] = ref_full[keep] / ref_full[keep].sum()
    return round_kernel, pi, product_ref


def accounting_report(summary: RunSummary, p: int, kinds) -> list:
    """Per-replica table: mean rejection-free steps per window and eval totals."""
    rows = []
    for i, kind in enumerate(kinds):
        steps = summary.window_iters[i]
        weights = summary.window_weights[i]
        total_w = float(np.sum(weights)) if weights else 0.0
        evals = summary.eval_counts[i]
        rows.append({
            "replica": i,
            "kind": kind,
            "mean_iters_per_window": float(np.mean(steps)) if steps else 0.0,
            "pi_evals": evals,
            "evals_per_retained_sample": evals / total_w if total_w else 0.0,
        })
    return rows


# ---------------------------------------------------------------------------
# CSV interface (RFC-4180 via the csv module; one header line per file)

def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def _fmt_seconds(value) -> str:
    return "" if value is None else f"{value:.6f}"


def write_runs_csv(path, summaries) -> None:
    header = ["seed", "algorithm", "rounds", "total_evals",
              "all_modes_found", "final_tvd", "seconds"]
    rows = []
    for s in summaries:
        final_tvd = f"{s.tvd_curve[-1][1]:.12g}" if s.tvd_curve else ""
        rows.append([s.seed, s.algorithm, s.rounds_run, sum(s.eval_counts),
                     int(s.all_modes_found), final_tvd,
                     _fmt_seconds(s.wall_seconds)])
    _write_csv(path, header, rows)


def write_hits_csv(path, summaries) -> None:
    header = ["seed", "algorithm", "mode_index", "round", "evals", "seconds"]
    rows = []
    for s in summaries:
        for h in s.hits:
            rows.append([s.seed, s.algorithm, h.mode_index, h.round,
                         h.evals, _fmt_seconds(h.seconds)])
    _write_csv(path, header, rows)


def write_tvd_csv(path, summaries) -> None:
    rows = []
    for s in summaries:
        for checkpoint, value in s.tvd_curve:
            rows.append([s.seed, checkpoint, f"{value:.12g}"])
    _write_csv(path, ["seed", "checkpoint", "value"], rows)


def write_swaps_csv(path, summaries) -> None:
    rows = []
    for s in summaries:
        for r in s.swap_records:
            rows.append([s.seed, r.round, f"{r.pair[0]}-{r.pair[1]}",
                         f"{r.probability:.12g}", int(r.accepted)])
    _write_csv(path, ["seed", "round", "pair", "prob", "accepted"], rows)


def write_gamma_csv(path, summaries) -> None:
    rows = []
    for s in summaries:
        for i, g in enumerate(s.gamma_final):
            rows.append([s.seed, i, f"{g:.12g}"])
    _write_csv(path, ["seed", "replica", "gamma_final"], rows)

"""Parallel tempering: ladders, budget windows, swaps, full runs."""
import math

import numpy as np
import pytest

import bitemper.tempering as tempering
from bitemper.samplers import ReplicaState, spawn_rngs
from bitemper.state import BinaryState
from bitemper.target import TargetSpec, build_modes
from bitemper.tempering import (PTOptions, ReplicaLadder, advance_iterations,
                                advance_to_budget, deo_round, run_pt,
                                swap_prob_standard, swap_prob_z_corrected)
from _testutil import random_target


def two_mode_target(p=8, theta=2.0):
    return TargetSpec(build_modes(p, ["alternating", "alternating_inv"]),
                      theta)


def test_ladder_validation():
    with pytest.raises(ValueError):
        ReplicaLadder(betas=(), kinds=())
    with pytest.raises(ValueError):
        ReplicaLadder(betas=(1.0, 1.0), kinds=("mh", "mh"))  # not decreasing
    with pytest.raises(ValueError):
        ReplicaLadder(betas=(1.0, -0.1), kinds=("mh", "mh"))
    with pytest.raises(ValueError):
        ReplicaLadder(betas=(1.0, 0.5), kinds=("mh", "gibbs"))
    with pytest.raises(ValueError):
        # single-step rung before an informed rung
        ReplicaLadder(betas=(1.0, 0.5), kinds=("mh", "aiit"))
    with pytest.raises(ValueError):
        ReplicaLadder(betas=(1.0,), kinds=("mh",), L0=0)
    ok = ReplicaLadder(betas=(1.0, 0.5), kinds=("aiit", "ss_iit"), L0=10)
    assert ok.size == 2 and not ok.direct_weight
    assert ReplicaLadder(betas=(1.0,), kinds=("iit",)).direct_weight


def test_budget_windows_sum_to_l0(rng):
    t = two_mode_target()
    for kind in ("aiit", "mh_mult", "mh", "ss_iit"):
        r = ReplicaState.create(t, np.random.default_rng(5), gamma0=2.0)
        for _ in range(20):
            samples, total, iters = advance_to_budget(r, t, kind, 37)
            assert total == 37.0
            assert sum(s.weight for s in samples) == 37.0
            assert iters == len(samples)
            assert all(s.weight >= 1 for s in samples)


def test_budget_rejects_direct_weight_kinds(rng):
    t = two_mode_target()
    r = ReplicaState.create(t, np.random.default_rng(5))
    with pytest.raises(ValueError):
        advance_to_budget(r, t, "iit", 10)


def test_advance_iterations_counts(rng):
    t = two_mode_target()
    r = ReplicaState.create(t, np.random.default_rng(5))
    samples, total, iters = advance_iterations(r, t, "rf_mh", 25)
    assert iters == 25 and len(samples) == 25
    assert total == pytest.approx(sum(s.weight for s in samples))


def test_deferred_jump_truncation(monkeypatch):
    """Multiplicity draws (3, 4) against budget 5 record weights (3, 2); the
    second jump is deferred and the chain holds its state."""
    t = two_mode_target()
    r = ReplicaState.create(t, np.random.default_rng(9), gamma0=2.0)
    draws = iter([3, 4])
    monkeypatch.setattr(tempering, "sample_multiplicity",
                        lambda z, rng: next(draws))
    key0 = r.key
    samples, total, iters = advance_to_budget(r, t, "mh_mult", 5)
    assert [s.weight for s in samples] == [3.0, 2.0]
    assert total == 5.0 and iters == 2
    assert samples[0].key == key0
    assert samples[1].key == r.key          # deferred: still at that state
    assert r.key != key0                    # exactly one jump happened
    assert r.stats.rf_steps == 1


def test_unit_batch_path_deterministic_and_same_law():
    """collect=False takes the batched kernel; it must be reproducible and
    follow the same chain law as the per-step path."""
    t = two_mode_target(theta=1.0)
    a = ReplicaState.create(t, np.random.default_rng(77))
    b = ReplicaState.create(t, np.random.default_rng(77))
    advance_to_budget(a, t, "mh", 2000, collect=False)
    advance_to_budget(b, t, "mh", 2000, collect=False)
    assert a.key == b.key                       # reproducible
    assert a.stats.pi_evals == 2000
    # acceptance fraction agrees with the per-step path within noise
    c = ReplicaState.create(t, np.random.default_rng(123))
    advance_to_budget(c, t, "mh", 2000, collect=True)
    rate_batch = a.stats.rf_steps / 2000
    rate_step = c.stats.rf_steps / 2000
    assert abs(rate_batch - rate_step) < 5 * math.sqrt(0.25 / 2000)


def test_ssiit_batch_adapts_bound():
    t = two_mode_target(theta=1.0)
    r = ReplicaState.create(t, np.random.default_rng(78), gamma0=1.0,
                            adapt_basis="sqrt")
    advance_to_budget(r, t, "ss_iit", 400, collect=False)
    # sqrt basis: the bound grows but stays below e^{theta*beta/2}
    assert 1.0 < r.bound.gamma <= math.exp(0.5) + 1e-12


def test_swap_prob_standard_properties(rng):
    t = two_mode_target()
    xi = rng.integers(0, 2, 8, dtype=np.uint8)
    xj = rng.integers(0, 2, 8, dtype=np.uint8)
    a = swap_prob_standard(xi, xj, 1.0, 0.3, t)
    b = swap_prob_standard(xj, xi, 1.0, 0.3, t)
    assert 0.0 < a <= 1.0 and 0.0 < b <= 1.0
    assert max(a, b) == 1.0                 # one direction always accepts
    assert swap_prob_standard(xi, xi, 1.0, 0.3, t) == 1.0
    with pytest.raises(ValueError):
        swap_prob_standard(xi, xj, 0.5, 0.5, t)


def test_swap_prob_z_corrected_reduces_to_standard(rng):
    t = two_mode_target()
    xi = rng.integers(0, 2, 8, dtype=np.uint8)
    xj = rng.integers(0, 2, 8, dtype=np.uint8)
    plain = swap_prob_standard(xi, xj, 1.0, 0.3, t)
    same_z = swap_prob_z_corrected(0.5, 0.5, 0.5, 0.5, xi, xj, 1.0, 0.3, t)
    assert same_z == pytest.approx(plain, rel=1e-12)


def test_deo_round_parity_pairs(rng):
    t = two_mode_target()
    ladder = ReplicaLadder(betas=(1.0, 0.8, 0.6, 0.4), kinds=("mh",) * 4)
    replicas = [ReplicaState.create(t, g) for g in spawn_rngs(4, 4)]
    swap_rng = np.random.default_rng(0)
    even = deo_round(ladder, replicas, t, swap_rng, "standard", 0, "even")
    odd = deo_round(ladder, replicas, t, swap_rng, "standard", 1, "odd")
    assert [r.pair for r in even] == [(0, 1), (2, 3)]
    assert [r.pair for r in odd] == [(1, 2)]
    with pytest.raises(ValueError):
        deo_round(ladder, replicas, t, swap_rng, "bogus", 0, "even")


def test_deo_round_z_corrected_charges_evals(rng):
    t = two_mode_target()
    ladder = ReplicaLadder(betas=(1.0, 0.5), kinds=("iit", "iit"))
    replicas = [ReplicaState.create(t, g) for g in spawn_rngs(4, 2)]
    before = sum(r.stats.pi_evals for r in replicas)
    deo_round(ladder, replicas, t, np.random.default_rng(0), "z_corrected",
              0, "even")
    # four escape probabilities, p evaluations each
    assert sum(r.stats.pi_evals for r in replicas) - before == 4 * t.p


def test_accepted_swap_exchanges_states():
    t = two_mode_target()
    ladder = ReplicaLadder(betas=(1.0, 0.2), kinds=("mh", "mh"))
    replicas = [ReplicaState.create(t, g) for g in spawn_rngs(11, 2)]
    keys = [r.key for r in replicas]
    rec = deo_round(ladder, replicas, t, np.random.default_rng(3),
                    "standard", 0, "even")[0]
    if rec.accepted:
        assert [r.key for r in replicas] == keys[::-1]
    else:
        assert [r.key for r in replicas] == keys


def run_small(seed=41, **opt_kw):
    t = two_mode_target()
    ladder = ReplicaLadder(betas=(2.0, 1.0, 0.5),
                           kinds=("aiit", "aiit", "ss_iit"), L0=50)
    defaults = dict(rounds=40, record_tvd=True, record_hits=True,
                    algorithm_label="aiit")
    defaults.update(opt_kw)
    return run_pt(t, ladder, PTOptions(**defaults), seed)


def test_run_pt_is_deterministic():
    a, b = run_small(), run_small()
    assert a.eval_counts == b.eval_counts
    assert a.gamma_final == b.gamma_final
    assert a.tvd_curve == b.tvd_curve
    assert [(h.mode_index, h.round, h.evals) for h in a.hits] == \
           [(h.mode_index, h.round, h.evals) for h in b.hits]
    assert a.wall_seconds is None


def test_run_pt_summary_shape():
    s = run_small()
    assert s.rounds_run == 40
    assert len(s.window_weights) == 3 and len(s.gamma_final) == 3
    assert all(len(w) == 40 for w in s.window_weights)
    assert all(w == 50.0 for w in s.window_weights[0])
    assert s.algorithm == "aiit"
    # every round records the parity-matching swap attempts
    assert len(s.swap_records) == 40
    assert s.eval_counts[0] > 0


def test_run_pt_hits_monotone_evals():
    s = run_small(rounds=200)
    evals = [h.evals for h in s.hits]
    assert evals == sorted(evals)
    assert {h.mode_index for h in s.hits} <= {0, 1}


def test_run_pt_stop_when_all_modes_found():
    s = run_small(rounds=5000, stop_when_all_modes_found=True)
    assert s.all_modes_found
    assert s.rounds_run < 5000
    assert s.rounds_run == max(h.round for h in s.hits) + 1


def test_run_pt_freeze_after_burnin():
    s = run_small(burnin_multiplicity=200, freeze_after_burnin=True,
                  rounds=30)
    frozen = s.gamma_final
    s2 = run_small(burnin_multiplicity=200, freeze_after_burnin=True,
                   rounds=60)
    assert s2.gamma_final[:2] == frozen[:2]  # informed bounds frozen early


def test_run_pt_no_adapt_keeps_gamma0():
    s = run_small(adapt=False, gamma0=3.0)
    assert s.gamma_final == [3.0, 3.0, 3.0]


def test_run_pt_start_at_mode():
    t = two_mode_target()
    ladder = ReplicaLadder(betas=(1.0,), kinds=("aiit",), L0=20)
    s = run_pt(t, ladder, PTOptions(rounds=1, record_hits=True,
                                    start_at_mode=1), seed=5)
    assert s.hits and s.hits[0].mode_index == 1 and s.hits[0].round == 0


def test_run_pt_tvd_needs_enumerable_target():
    big = TargetSpec(build_modes(24, ["alternating"]), 1.0)
    ladder = ReplicaLadder(betas=(1.0,), kinds=("mh",), L0=5)
    with pytest.raises(ValueError):
        run_pt(big, ladder, PTOptions(rounds=1, record_tvd=True), seed=1)


def test_run_pt_wall_clock_recorded():
    s = run_small(rounds=3, record_wall_clock=True)
    assert s.wall_seconds is not None and s.wall_seconds > 0
    assert all(h.seconds is not None for h in s.hits)

import math

import numpy as np
import pytest

from pbitsim import network as nw
from pbitsim.device import BarrierSpec, DistortionProfile, PBitParams
from pbitsim.metrics import StateDistribution, distribution, tv_distance
from pbitsim.sampler import ChainConfig, Schedule, default_anneal, run_chain
from pbitsim.variability import DeviceEnsemble, DistortionSweep, ideal_ensemble, sample_ensemble

P = PBitParams()


def test_uncoupled_devices_are_fair():
    n, t = 4, 10**6
    net = nw.NetworkSpec(np.zeros((n, n)), np.zeros(n), nw.Kind.EMOA)
    acc = run_chain(net, ideal_ensemble(n), P, config=ChainConfig(t, 3))
    assert np.all(np.abs(acc.marginal_sum / t) <= 4 / math.sqrt(t))
    assert np.all(np.abs(acc.corr_sum[np.triu_indices(n, 1)] / t) <= 4 / math.sqrt(t))


def test_accumulator_invariants():
    acc = run_chain(nw.family_tree_bn(20), ideal_ensemble(20), P, config=ChainConfig(5000, 1, record_burn_in=100))
    assert acc.recorded_steps == 4900
    assert sum(acc.histogram.values()) == acc.recorded_steps
    assert np.array_equal(acc.corr_sum, acc.corr_sum.T)
    assert np.all(np.abs(acc.corr_sum) <= acc.recorded_steps)
    assert np.all(np.diag(acc.corr_sum) == acc.recorded_steps)


def test_corr_sum_matches_direct_accumulation():
    net = nw.and_gate()
    acc = run_chain(net, ideal_ensemble(3), P, config=ChainConfig(2000, 8))
    corr = np.zeros((3, 3))
    marg = np.zeros(3)
    for code, count in acc.histogram.items():
        m = np.array([1 if (code >> i) & 1 else -1 for i in range(3)])
        corr += count * np.outer(m, m)
        marg += count * m
    assert np.array_equal(acc.corr_sum, corr) and np.array_equal(acc.marginal_sum, marg)


def test_and_gate_boltzmann():
    # oracle: brute-force partition function over the 8 states
    net = nw.and_gate()
    states = nw.all_states(3)
    e = np.array([-(0.5 * s @ net.j @ s + net.h @ s) for s in states.astype(float)])
    w = np.exp(-0.8 * e)
    exact = StateDistribution.from_dense(w / w.sum(), 3)
    acc = run_chain(net, ideal_ensemble(3), P, Schedule.fixed(0.8), ChainConfig(10**6, 21))
    assert tv_distance(distribution(acc), exact) < 0.01
    assert len(acc.histogram) == 8


def test_frozen_devices_never_move():
    net = nw.and_gate()
    ens = DeviceEnsemble(ideal_ensemble(3).profiles, (BarrierSpec(math.inf),) * 3)
    acc = run_chain(net, ens, P, config=ChainConfig(1000, 5))
    assert len(acc.histogram) == 1
    assert not np.any(acc.update_counts)


def test_barrier_gating_update_counts():
    t = 10**5
    u = np.array([0.0, 1.0, 3.0, 6.0])
    ens = DeviceEnsemble(ideal_ensemble(4).profiles, tuple(BarrierSpec(x) for x in u))
    net = nw.random_symmetric(4, seed=1)
    acc = run_chain(net, ens, P, config=ChainConfig(t, 9))
    expected = t * np.exp(-u)
    assert acc.update_counts[0] == t
    # binomial counts, 4 sigma (Poisson-bounded)
    assert np.all(np.abs(acc.update_counts - expected) <= 4 * np.sqrt(expected) + 1e-9)


def test_root_marginal_half():
    t = 10**6
    acc = run_chain(nw.family_tree_bn(8), ideal_ensemble(8), P, config=ChainConfig(t, 4))
    assert np.all(np.abs(acc.marginal_sum[:2] / t) <= 4 / math.sqrt(t))


def test_determinism():
    net = nw.full_adder()
    ens = sample_ensemble(14, DistortionSweep("barrier", 3.0), np.random.default_rng(0))
    a = run_chain(net, ens, P, default_anneal(20000), ChainConfig(20000, 77))
    b = run_chain(net, ens, P, default_anneal(20000), ChainConfig(20000, 77))
    assert a.histogram == b.histogram
    assert np.array_equal(a.corr_sum, b.corr_sum) and np.array_equal(a.update_counts, b.update_counts)
    c = run_chain(net, ens, P, default_anneal(20000), ChainConfig(20000, 78))
    assert a.histogram != c.histogram


def test_block_size_independence(monkeypatch):
    import pbitsim.sampler as sm
    net = nw.and_gate()
    ens = sample_ensemble(3, DistortionSweep("barrier", 2.0), np.random.default_rng(1))
    a = run_chain(net, ens, P, config=ChainConfig(5000, 3))
    monkeypatch.setattr(sm, "_BLOCK_DRAWS", 7)
    b = run_chain(net, ens, P, config=ChainConfig(5000, 3))
    assert a.histogram == b.histogram


def test_ideal_ensemble_same_seed_identical():
    net = nw.and_gate()
    a = run_chain(net, ideal_ensemble(3), P, config=ChainConfig(3000, 12))
    b = run_chain(net, sample_ensemble(3, DistortionSweep("hshift", 0.0), np.random.default_rng(5)), P,
                  config=ChainConfig(3000, 12))
    assert a.histogram == b.histogram


def test_distortion_changes_statistics():
    net = nw.and_gate()
    ens = DeviceEnsemble((DistortionProfile(h_shift=1.0),) * 3, ideal_ensemble(3).barriers)
    a = run_chain(net, ideal_ensemble(3), P, config=ChainConfig(10**5, 1))
    b = run_chain(net, ens, P, config=ChainConfig(10**5, 1))
    assert b.marginal_sum.sum() < a.marginal_sum.sum()


def test_ergodic_and_gate_visits_all_states():
    acc = run_chain(nw.and_gate(), ideal_ensemble(3), P, config=ChainConfig(10**6, 2))
    assert len(acc.histogram) == 8


def test_default_anneal():
    s = default_anneal()
    assert s.total_steps == 10**6
    assert [k for k, _ in s.stages] == pytest.approx([0.5, 1.625, 2.75, 3.875, 5.0])
    assert {n for _, n in s.stages} == {200_000}
    assert s.kappas(199_999, 200_001).tolist() == [0.5, 1.625]
    assert s.kappas(999_999, 10**6).tolist() == [5.0]


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule.fixed(0.0)
    with pytest.raises(ValueError):
        Schedule.annealing([(1.0, 0)])
    with pytest.raises(ValueError):
        run_chain(nw.and_gate(), ideal_ensemble(3), P, default_anneal(100), ChainConfig(50, 0))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        run_chain(nw.and_gate(), ideal_ensemble(4), P, config=ChainConfig(10, 0))


def test_annealing_concentrates_on_ground_states():
    net = nw.full_adder()
    acc = run_chain(net, ideal_ensemble(14), P, default_anneal(50_000), ChainConfig(50_000, 6, record_burn_in=40_000))
    ground = {nw.state_code(g.state) for g in nw.ground_states(net)}
    assert sum(c for s, c in acc.histogram.items() if s in ground) / acc.recorded_steps > 0.9

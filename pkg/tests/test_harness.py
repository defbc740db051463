import json

import numpy as np
import pytest

from pbitsim import harness
from pbitsim.harness import ConfigError, ExperimentConfig, compare_schedules, derive_seed, run_experiment

SMALL = dict(levels=[0.0, 0.5, 1.0], steps=2000, reps=3, master_seed=11)


def test_csv_header_exact():
    rows = run_experiment(ExperimentConfig(**SMALL))
    text = harness.rows_to_csv(rows)
    assert text.splitlines()[0] == "network,n,kind,sweep,level,schedule,mean_mae,std_mae,reps,steps"
    assert len(text.splitlines()) == 4
    first = text.splitlines()[1].split(",")
    assert first[:6] == ["and_gate", "3", "emoa", "hshift", "0.0", "fixed(0.8)"]
    assert first[8:] == ["3", "2000"]


def test_rows_sorted_by_level():
    rows = run_experiment(ExperimentConfig(**SMALL))
    assert [r.level for r in rows] == [0.0, 0.5, 1.0]


def test_paired_seed_self_test_is_zero():
    for net in ({"name": "and_gate"}, {"name": "family_tree_bn", "n": 8}):
        rows = run_experiment(ExperimentConfig(network=net, levels=[0.0], steps=3000, reps=4, paired_seeds=True))
        assert rows[0].mean_mae == 0.0 and rows[0].std_mae == 0.0


def test_level_zero_is_noise_floor():
    rows = run_experiment(ExperimentConfig(levels=[0.0, 1.0], steps=20000, reps=5))
    assert rows[0].mean_mae < 0.03 < rows[1].mean_mae


def test_worker_count_does_not_change_results():
    cfg = ExperimentConfig(**SMALL)
    serial = harness.rows_to_csv(run_experiment(cfg))
    cfg.workers = 2
    assert harness.rows_to_csv(run_experiment(cfg)) == serial


def test_seed_splitting():
    seeds = {derive_seed(0, li, k, role) for li in range(3) for k in range(10) for role in range(3)}
    assert len(seeds) == 90
    assert derive_seed(5, 1, 2, 0) == derive_seed(5, 1, 2, 0)
    assert all(0 <= s < 2**64 for s in seeds)


def test_pga_uses_correlation_metric():
    rows = run_experiment(ExperimentConfig(network={"name": "family_tree_bn", "n": 8}, levels=[0.0, 1.0],
                                           steps=5000, reps=2))
    assert rows[0].kind == "pga" and rows[1].mean_mae > rows[0].mean_mae


def test_analytic_reference_mode():
    cfg = ExperimentConfig(levels=[0.0], steps=10**5, reps=2, reference="analytic")
    assert run_experiment(cfg)[0].mean_mae < 0.01


def test_output_bits_mode():
    cfg = ExperimentConfig(network={"name": "full_adder"}, levels=[0.0, 1.0], steps=5000, reps=2,
                           output_bits=[0, 1, 2, 3, 4])
    rows = run_experiment(cfg)
    assert rows[0].n == 14 and rows[1].mean_mae <= 2 / 5


def test_compare_schedules_fixed_column_matches():
    cfg = ExperimentConfig(**SMALL)
    pairs = compare_schedules(cfg)
    assert len(pairs) == 3
    assert [f for f, _ in pairs] == run_experiment(cfg)
    assert all(a.schedule.startswith("anneal(") for _, a in pairs)


def test_compare_schedules_rejects_pga():
    with pytest.raises(ConfigError):
        compare_schedules(ExperimentConfig(network={"name": "family_tree_bn", "n": 8}, **SMALL))


def test_run_all_sweeps():
    rows = harness.run_all_sweeps(ExperimentConfig(levels=[0.0, 1.0], steps=500, reps=1))
    assert [r.sweep for r in rows] == ["hshift"] * 2 + ["vshift"] * 2 + ["hscale"] * 2 + ["vscale"] * 2 + ["barrier"] * 2
    assert rows[-1].level == 10.0 and rows[5].level == 0.9


@pytest.mark.parametrize("bad", [
    {"reps": 0},
    {"levels": []},
    {"levels": [0.5, 0.1]},
    {"levels": [-1.0]},
    {"levels": [0.0, 1.5]},  # beyond vdd/2 for horizontal shift
    {"sweep": "tilt"},
    {"schedule": "geometric"},
    {"schedule": [[0.5, 10], [1.0, 10]], "steps": 100},
    {"params": {"kappa": -1}},
    {"reference": "oracle"},
    {"bogus": 1},
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_scale_level_error_raised_at_run():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(sweep="hscale", levels=[0.0, 1.0], steps=10, reps=1))


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"network": {"name": "random_symmetric", "n": 6, "seed": 2},
                                "sweep": "vscale", "levels": [0, 0.5], "steps": 100, "reps": 2,
                                "schedule": [[0.5, 50], [2.0, 50]]}))
    cfg = ExperimentConfig.from_file(path)
    rows = run_experiment(cfg)
    assert rows[0].schedule == "anneal(0.5x50;2x50)" and rows[0].n == 6


def test_network_from_file(tmp_path):
    from pbitsim.network import and_gate, save_network
    path = tmp_path / "net.txt"
    path.write_text(save_network(and_gate()))
    rows = run_experiment(ExperimentConfig(network={"name": "file", "path": str(path)}, levels=[0.0], steps=100, reps=1))
    assert rows[0].network == "net"


def _se(row):
    return row.std_mae / np.sqrt(row.reps)


@pytest.mark.parametrize("sweep", ["hshift", "vshift"])
def test_pga_shift_growth_at_least_linear(sweep):
    rows = run_experiment(ExperimentConfig(network={"name": "family_tree_bn", "n": 8}, sweep=sweep,
                                           levels=[0.0, 0.5, 1.0], steps=50_000, reps=20, master_seed=31))
    base, half, full = (r.mean_mae for r in rows)
    slack = 2 * np.hypot(_se(rows[1]) * 2, _se(rows[2]))
    assert full - base >= 2 * (half - base) - slack


@pytest.mark.parametrize("sweep", ["hshift", "vscale"])
def test_emoa_non_decreasing(sweep):
    levels = [0.0, 0.3, 0.6, 0.9]
    rows = run_experiment(ExperimentConfig(sweep=sweep, levels=levels, steps=50_000, reps=20, master_seed=32))
    for lo, hi in zip(rows, rows[1:]):
        assert hi.mean_mae >= lo.mean_mae - 2 * np.hypot(_se(lo), _se(hi))

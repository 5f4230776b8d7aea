import csv
import dataclasses
import itertools
import json

import numpy as np
import pytest

from driftnet.calibration import UNIFORM, WeightScheme
from driftnet.harness import (
    paired_permutation_p,
    rep_seed,
    run_condition,
    run_size_sweep,
    run_tasks,
    run_weight_comparison,
    write_outputs,
    workers_from_env,
)
from driftnet.config import ExperimentConfig
from driftnet.errors import ConfigError


def brute_force_sign_flip_p(a, b):
    d = np.asarray(a) - np.asarray(b)
    observed = abs(d.mean())
    stats = [abs((d * signs).mean()) for signs in itertools.product((1, -1), repeat=len(d))]
    return np.mean(np.array(stats) >= observed - 1e-12)


def test_drift_free_network_stays_accurate():
    # paper geometry; within-group concentration differences keep it from exact zero
    cfg = ExperimentConfig().with_overrides(["steps=300", "annealing.iterations=20", "alpha=[0,0,0]"])
    for rep in range(2):
        assert run_condition(cfg, "uncalibrated", rep_seed(cfg, rep)).errors.max() < 1e-6
        for cond in ("uniform", "linear", "optimized"):
            m = run_condition(cfg, cond, rep_seed(cfg, rep))
            assert m.rendezvous.sum() > 0
            assert m.mean_error < 0.25


def test_anchor_table_seeding(small_config):
    from driftnet.harness import init_sensors

    sensors = init_sensors(small_config, np.random.default_rng(0))
    assert [e.time for e in sensors[0].table] == [0] * small_config.anchor_points
    assert sensors[0].table[-1].estimate == small_config.plume.amplitude
    bare = init_sensors(dataclasses.replace(small_config, anchor_points=0), np.random.default_rng(0))
    assert bare[0].table == [] and bare[0].initial_params == sensors[0].initial_params


def test_contacts_happen_in_small_config(small_config):
    m = run_condition(small_config, "uniform", rep_seed(small_config, 0))
    assert len(m.errors) == small_config.steps and np.all(m.errors >= 0)
    assert m.rendezvous.sum() > 10


@pytest.mark.parametrize("cond", ["uniform", "linear", "optimized"])
def test_no_rendezvous_equals_baseline(small_config, cond):
    cfg = dataclasses.replace(small_config, range=1e-9)
    base = run_condition(cfg, "uncalibrated", rep_seed(cfg, 1))
    other = run_condition(cfg, cond, rep_seed(cfg, 1))
    assert other.rendezvous.sum() == 0
    assert np.array_equal(base.errors, other.errors)


def test_isolated_sensor_equals_baseline(small_config):
    cfg = dataclasses.replace(small_config, n_sensors=1)
    base = run_condition(cfg, "uncalibrated", rep_seed(cfg, 0))
    opt = run_condition(cfg, "optimized", rep_seed(cfg, 0))
    assert opt.rendezvous.sum() == 0 and np.array_equal(base.errors, opt.errors)


def test_exponential_zero_is_uniform_bit_for_bit(small_config):
    a = run_condition(small_config, UNIFORM, rep_seed(small_config, 2))
    b = run_condition(small_config, WeightScheme("exponential", 0.0), rep_seed(small_config, 2))
    assert a.rendezvous.sum() > 0
    assert np.array_equal(a.errors, b.errors) and np.array_equal(a.rendezvous, b.rendezvous)
    assert a.nonmonotone == b.nonmonotone


def test_conditions_share_traces(small_config):
    runs = [run_condition(small_config, c, rep_seed(small_config, 3))
            for c in ("uncalibrated", "uniform", "linear", "optimized")]
    for m in runs[1:]:
        assert np.array_equal(m.rendezvous, runs[0].rendezvous)
    # λ training draws from its own stream
    shared = dataclasses.replace(small_config, shared_lambda=0.05)
    assert np.array_equal(run_condition(shared, "optimized", rep_seed(shared, 3)).rendezvous,
                          runs[0].rendezvous)
    assert len(runs[3].lambdas) == small_config.n_sensors
    lo, hi = small_config.annealing.lambda_bounds
    assert all(lo <= lam <= hi for lam in runs[3].lambdas)


def test_shared_lambda_switch(small_config):
    cfg = dataclasses.replace(small_config, shared_lambda=0.07)
    assert run_condition(cfg, "optimized", rep_seed(cfg, 0)).lambdas == [0.07] * cfg.n_sensors


def test_error_metric_is_scale_free(small_config):
    k = 10.0
    scaled = dataclasses.replace(
        small_config,
        plume=dataclasses.replace(small_config.plume, amplitude=small_config.plume.amplitude * k),
        drift_init_ranges=tuple((lo / k**j, hi / k**j)
                                for j, (lo, hi) in enumerate(small_config.drift_init_ranges)),
    )
    for cond in ("uncalibrated", "linear"):
        a = run_condition(small_config, cond, rep_seed(small_config, 0))
        b = run_condition(scaled, cond, rep_seed(scaled, 0))
        assert np.array_equal(a.rendezvous, b.rendezvous)
        np.testing.assert_allclose(a.errors, b.errors, rtol=1e-5, atol=1e-9)


def test_runs_are_deterministic_and_parallel_safe(small_config):
    tasks = [(small_config, c, r) for c in ("uncalibrated", "optimized") for r in range(2)]
    serial = run_tasks(tasks, workers=1)
    again = run_tasks(tasks, workers=1)
    parallel = run_tasks(tasks, workers=2)
    for a, b, c in zip(serial, again, parallel):
        assert a.same_as(b) and a.same_as(c)
        assert (a.condition, a.repetition) == (c.condition, c.repetition)


def test_weight_comparison_shape(small_config):
    res = run_weight_comparison(small_config)
    s = res["summary"]
    assert list(res["matrix"]) == ["uncalibrated", "uniform", "linear", "optimized"]
    assert all(len(v) == small_config.repetitions for v in res["matrix"].values())
    assert set(s["reductions_pct"]) == {"uniform", "linear", "optimized"}
    assert "optimized_vs_linear" in s["p_values"]
    assert len(s["lambdas"]["optimized"]) == small_config.repetitions
    assert s["config"] == small_config.to_dict()
    assert res["matrix"]["uniform"] != res["matrix"]["uncalibrated"]


def test_size_sweep_table(small_config):
    cfg = dataclasses.replace(small_config, repetitions=2, steps=80)
    res = run_size_sweep(cfg, sizes=[1, 4, 12], condition="linear")
    sizes = [row["n_sensors"] for row in res["table"]]
    assert sizes == [1, 4, 12]
    rates = [row["rendezvous_per_step"] for row in res["table"]]
    assert rates[0] == 0.0 and rates[0] < rates[1] < rates[2]
    assert res["summary"]["rendezvous_size_spearman"] == pytest.approx(1.0)
    assert {m.condition for m in res["runs"]} == {"linear@1", "linear@4", "linear@12"}


def test_size_sweep_needs_sizes(small_config):
    with pytest.raises(ConfigError):
        run_size_sweep(small_config, sizes=[])


@pytest.mark.parametrize("seed", range(5))
def test_permutation_p_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(1.0, 1.0, 10)
    b = a + rng.normal(0.3 * seed, 1.0, 10)
    assert paired_permutation_p(a, b) == pytest.approx(brute_force_sign_flip_p(a, b), abs=1e-12)


def test_permutation_p_identical_samples():
    assert paired_permutation_p([1.0, 2.0], [1.0, 2.0]) == 1.0


def test_strict_separation_hits_the_exact_floor():
    a = np.arange(10.0)
    assert paired_permutation_p(a, a + 1.0) == pytest.approx(2 / 1024)


def test_outputs_written(small_config, tmp_path):
    cfg = dataclasses.replace(small_config, repetitions=2, steps=20, conditions=("uncalibrated", "uniform"))
    res = run_weight_comparison(cfg)
    csv_path, json_path = write_outputs(tmp_path, "cmp", res["runs"], res["summary"])
    rows = list(csv.DictReader(open(csv_path)))
    assert list(rows[0]) == ["condition", "repetition", "step", "mean_error_pct", "rendezvous_count"]
    assert len(rows) == 2 * 2 * 20
    assert rows[0]["condition"] == "uncalibrated" and rows[0]["step"] == "1"
    summary = json.loads(json_path.read_text())
    assert summary["config"]["steps"] == 20


def test_threads_env(monkeypatch):
    monkeypatch.setenv("DRIFTNET_THREADS", "3")
    assert workers_from_env() == 3
    monkeypatch.setenv("DRIFTNET_THREADS", "many")
    with pytest.raises(ConfigError):
        workers_from_env()
    monkeypatch.delenv("DRIFTNET_THREADS")
    assert workers_from_env() == 1

import math

import numpy as np
import pytest

from envy_condensation import ClassLabel, ExperimentConfig, epsilon_sweep, heterogeneous_scatter, run_experiment
from envy_condensation.sweeps import OBSERVABLES, ExperimentError, run_experiment as real_runner, with_overrides

SMALL = ExperimentConfig(agents=12, options=12, iterations=20_000, epsilon_grid=(0.0, 3.0), replicates=2)


def test_defaults():
    cfg = ExperimentConfig()
    assert (cfg.theta, cfg.kappa, cfg.fitness_offset, cfg.fitness_floor) == (0.5, 0.5, 20.0, 0.0)
    assert cfg.iterations == 100_000 and cfg.envy_mode == "uniform"
    assert cfg.variant.value == "income-envy"


@pytest.mark.parametrize(
    "kwargs",
    [dict(theta=1.0), dict(kappa=-1), dict(epsilon=-1), dict(epsilon_grid=(1, -1)), dict(replicates=0),
     dict(envy_mode="gaussian"), dict(options=1), dict(seeds=(1,), replicates=2), dict(variant="nope")],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_seed_schedule():
    assert ExperimentConfig(replicates=3, base_seed=10).replicate_seeds() == [10, 11, 12]
    assert ExperimentConfig(replicates=2, seeds=(7, 3, 5)).replicate_seeds() == [7, 3]


def test_per_agent_envy_draws():
    cfg = ExperimentConfig(agents=500, envy_mode="per-agent-uniform")
    e = np.array(cfg.draw_envy(2.0, 4))
    assert e.shape == (500,)
    assert e.min() >= 0 and e.max() <= 4.0
    assert abs(e.mean() - 2.0) < 0.2
    assert np.array_equal(e, cfg.draw_envy(2.0, 4))
    assert not np.array_equal(e, cfg.draw_envy(2.0, 5))
    assert np.all(np.array(cfg.draw_envy(0.0, 4)) == 0)
    assert cfg.draw_envy(2.0, 4) != ExperimentConfig(envy_mode="uniform").draw_envy(2.0, 4)


def test_zero_mean_heterogeneous_envy_has_no_mixed_agents():
    cfg = with_overrides(SMALL, envy_mode="per-agent-uniform")
    table = heterogeneous_scatter(cfg, seed=0, epsilon=0.0)
    assert np.all(table.envy == 0)
    assert ClassLabel.MIXED not in table.labels
    assert table.class_interval(ClassLabel.MIXED) is None


def test_scatter_needs_per_agent_mode():
    with pytest.raises(ValueError):
        heterogeneous_scatter(SMALL, seed=0, epsilon=1.0)


def test_run_experiment_is_deterministic():
    a = run_experiment(SMALL, 3.0, 5)
    b = run_experiment(SMALL, 3.0, 5)
    assert np.array_equal(a.dynamics.final_population, b.dynamics.final_population)
    assert a.report.labels == b.report.labels
    assert a.observables() == pytest.approx(b.observables(), nan_ok=True)


def test_sweep_records():
    records, runs = epsilon_sweep(SMALL, keep_runs=True)
    assert [r.epsilon for r in records] == [0.0, 3.0]
    assert [(r.epsilon, r.seed) for r in runs] == [(0.0, 0), (0.0, 1), (3.0, 0), (3.0, 1)]
    for rec in records:
        assert rec.seeds == [0, 1]
        for obs in rec.replicates:
            assert set(obs) == set(OBSERVABLES)
            assert abs(obs["frac_pure1"] + obs["frac_pure2"] + obs["frac_mixed"] - 1) <= 1e-9
            assert obs["total_mixed_support_ratio"] >= 0
    eps0 = records[0]
    assert eps0.mean("frac_mixed") == 0
    assert math.isnan(eps0.mean("avg_mixed_support"))
    assert eps0.sd("mean_income") >= 0


def test_threads_do_not_change_results():
    serial = epsilon_sweep(SMALL)
    threaded = epsilon_sweep(SMALL, threads=3)
    for a, b in zip(serial, threaded):
        assert a.seeds == b.seeds
        for x, y in zip(a.replicates, b.replicates):
            assert x == pytest.approx(y, nan_ok=True, rel=0, abs=0)


def test_failed_replicates_are_reported_not_averaged():
    def runner(config, eps, seed):
        if seed == 1:
            raise ExperimentError(eps, seed, RuntimeError("boom"))
        return real_runner(config, eps, seed)

    records = epsilon_sweep(SMALL, runner=runner)
    for rec in records:
        assert rec.seeds == [0]
        assert rec.failures == [(1, "boom")]
        assert math.isnan(rec.sd("mean_income"))


def test_run_errors_are_tagged(monkeypatch):
    import envy_condensation.sweeps as sweeps
    from envy_condensation import DegenerateStateError

    def broken(*args, **kwargs):
        raise DegenerateStateError(3, 17)

    monkeypatch.setattr(sweeps, "evolve", broken)
    with pytest.raises(ExperimentError) as err:
        run_experiment(SMALL, 2.0, 9)
    assert (err.value.epsilon, err.value.seed) == (2.0, 9)
    assert isinstance(err.value.cause, DegenerateStateError)


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        epsilon_sweep(with_overrides(SMALL, epsilon_grid=()))

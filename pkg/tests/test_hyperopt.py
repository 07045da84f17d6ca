import json
import math

import numpy as np
import pytest

from ddipred.errors import ConfigError
from ddipred.hyperopt import (
    PHEROMONE_FLOOR,
    OptimizerSettings,
    PheromoneMatrix,
    SearchSpace,
    Swarm,
    aco_transition_probabilities,
    optimize,
    pso_step,
    rsmpl_seed,
)


def toy_space():
    return SearchSpace(
        discrete={"depth": (1, 2, 3), "width": (4, 8)},
        continuous={"rate": (0.0, 1.0, False)},
    )


def unit_coords(space, config):
    out = []
    for name, options in space.discrete.items():
        out.append(options.index(config[name]) / max(len(options) - 1, 1))
    for name in space.continuous:
        out.append(space.continuous_to_unit(name, config[name]))
    return np.array(out)


def quadratic_fitness(space, target):
    tu = unit_coords(space, target)

    def fitness(config, seed):
        return -float(np.sum((unit_coords(space, config) - tu) ** 2))

    return fitness


def test_transition_probabilities_uniform_when_flat():
    probs = aco_transition_probabilities([1.0, 1.0], [1.0, 1.0], 1.0, 2.0)
    assert np.array_equal(probs, [0.5, 0.5])


def test_transition_probabilities_hand_value():
    probs = aco_transition_probabilities([1.0, 2.0], [1.0, 1.0], alpha=1.0, beta=2.0)
    assert probs[0] == 1.0 / 3.0
    assert probs[1] == 2.0 / 3.0


def test_transition_probabilities_zero_exponents_are_uniform():
    probs = aco_transition_probabilities([5.0, 0.1, 2.0], [9.0, 1.0, 0.2], alpha=0.0, beta=0.0)
    assert np.allclose(probs, 1 / 3, atol=1e-15)


def test_transition_probabilities_sum_to_one():
    rng = np.random.default_rng(0)
    for _ in range(200):
        tau = rng.random(5) + 1e-6
        eta = rng.random(5) + 1e-6
        probs = aco_transition_probabilities(tau, eta, 1.0, 2.0)
        assert abs(probs.sum() - 1.0) <= 1e-12
        assert np.all(probs >= 0)


def test_transition_probabilities_reject_nonpositive():
    with pytest.raises(ConfigError):
        aco_transition_probabilities([0.0, 1.0], [1.0, 1.0], 1.0, 1.0)


def test_evaporation_and_elitist_deposit_exact():
    space = SearchSpace(discrete={"dim": ("a", "b")}, continuous={})
    pm = PheromoneMatrix.fresh(space, alpha=1.0, beta=2.0, rho=0.2)
    pm.evaporate()
    assert pm.tau["dim"][0] == (1.0 - 0.2) * 1.0  # 0.8 exactly
    pm.deposit(space, {"dim": "a"}, 0.9)
    assert pm.tau["dim"][0] == (1.0 - 0.2) * 1.0 + 0.9  # 1.7 in float64
    assert pm.tau["dim"][1] == 0.8


def test_pheromone_floor_holds():
    space = SearchSpace(discrete={"dim": ("a", "b")}, continuous={})
    pm = PheromoneMatrix.fresh(space, 1.0, 2.0, rho=1.0)
    pm.evaporate()
    assert np.all(pm.tau["dim"] >= PHEROMONE_FLOOR)


def test_pso_step_hand_values():
    swarm = Swarm(
        positions=np.array([[0.5]]),
        velocities=np.array([[0.1]]),
        p_best_pos=np.array([[0.6]]),
        p_best_fit=np.array([0.0]),
        g_best_pos=np.array([0.7]),
        g_best_fit=0.0,
        w=0.8, c1=1.2, c2=1.6,
    )
    pso_step(swarm, np.ones((1, 1)), np.ones((1, 1)))
    expected_v = 0.8 * 0.1 + 1.2 * 1.0 * (0.6 - 0.5) + 1.6 * 1.0 * (0.7 - 0.5)
    assert swarm.velocities[0, 0] == expected_v  # 0.52 in float64
    assert round(expected_v, 12) == 0.52
    assert swarm.positions[0, 0] == 1.0  # 0.5 + 0.52 clamped to the upper bound


def test_pso_step_fixed_points():
    pos = np.array([[0.4, 0.6]])
    swarm = Swarm(
        positions=pos.copy(),
        velocities=np.zeros((1, 2)),
        p_best_pos=pos.copy(),
        p_best_fit=np.array([1.0]),
        g_best_pos=pos[0].copy(),
        g_best_fit=1.0,
        w=0.8, c1=1.2, c2=1.6,
    )
    pso_step(swarm, np.full((1, 2), 0.3), np.full((1, 2), 0.9))
    assert np.array_equal(swarm.velocities, np.zeros((1, 2)))
    assert np.array_equal(swarm.positions, pos)


def test_pso_velocity_clamped_to_range_width():
    swarm = Swarm(
        positions=np.array([[0.0]]),
        velocities=np.array([[0.9]]),
        p_best_pos=np.array([[1.0]]),
        p_best_fit=np.array([0.0]),
        g_best_pos=np.array([1.0]),
        g_best_fit=0.0,
        w=1.0, c1=2.0, c2=2.0,
    )
    pso_step(swarm, np.ones((1, 1)), np.ones((1, 1)))
    assert swarm.velocities[0, 0] == 1.0
    assert swarm.positions[0, 0] == 1.0


def test_rsmpl_seed_counts_bounds_and_determinism():
    space = SearchSpace()
    fitness = quadratic_fitness(space, {
        "hidden_layers": 2, "neurons_per_layer": 96, "batch_size": 64,
        "optimizer": "sgd", "learning_rate": 1e-4, "dropout": 0.2,
    })
    ranked = rsmpl_seed(space, 30, seed=11, fitness_fn=fitness)
    assert len(ranked) == 30
    for config, fit in ranked:
        space.validate(config)
        assert math.isfinite(fit)
    fitnesses = [f for _, f in ranked]
    assert fitnesses == sorted(fitnesses, reverse=True)
    again = rsmpl_seed(space, 30, seed=11, fitness_fn=fitness)
    assert ranked == again


def test_log_uniform_learning_rate_sampling():
    space = SearchSpace()
    rng = np.random.default_rng(1)
    lrs = [space.sample(rng)["learning_rate"] for _ in range(400)]
    logs = np.log10(lrs)
    below = sum(1 for v in logs if v < -4)
    assert 120 <= below <= 280  # roughly half in each log decade


def test_optimize_monotone_best_and_budget():
    space = toy_space()
    fitness = quadratic_fitness(space, {"depth": 2, "width": 8, "rate": 0.25})
    settings = OptimizerSettings(n_rsmpl=10, n_ants=4, aco_iterations=8,
                                 n_particles=4, pso_iterations=8, seed=2)
    result = optimize(space, fitness, settings)
    assert result.n_evaluations <= 10 + 4 * 8 + 4 * 8
    assert len(result.log) == result.n_evaluations
    # replaying the log, the running best never decreases
    best = -np.inf
    for row in result.log:
        best = max(best, row.fitness)
    assert best == result.best_fitness
    space.validate(result.best_config)


def test_optimize_full_determinism():
    space = toy_space()
    fitness = quadratic_fitness(space, {"depth": 3, "width": 4, "rate": 0.8})
    settings = dict(n_rsmpl=8, n_ants=3, aco_iterations=5, n_particles=3,
                    pso_iterations=5, seed=9)
    a = optimize(space, fitness, OptimizerSettings(**settings))
    b = optimize(space, fitness, OptimizerSettings(**settings))
    assert a.best_config == b.best_config
    assert [(r.phase, r.iteration, r.agent, r.config, r.fitness) for r in a.log] == \
           [(r.phase, r.iteration, r.agent, r.config, r.fitness) for r in b.log]


def test_optimize_deterministic_across_worker_counts():
    space = toy_space()
    fitness = quadratic_fitness(space, {"depth": 1, "width": 8, "rate": 0.1})
    a = optimize(space, fitness, OptimizerSettings(n_rsmpl=8, n_ants=4, aco_iterations=4,
                                                   n_particles=4, pso_iterations=4, seed=3, workers=1))
    b = optimize(space, fitness, OptimizerSettings(n_rsmpl=8, n_ants=4, aco_iterations=4,
                                                   n_particles=4, pso_iterations=4, seed=3, workers=8))
    assert a.best_config == b.best_config
    assert [(r.phase, r.config, r.fitness) for r in a.log] == \
           [(r.phase, r.config, r.fitness) for r in b.log]


def test_constant_fitness_stops_each_phase_after_window():
    space = toy_space()
    result = optimize(space, lambda c, s: 0.7, OptimizerSettings(seed=4))
    assert result.phase_iterations == {"aco": 5, "pso": 5}
    assert result.n_evaluations == 30 + 5 * 20 + 5 * 20


def test_small_gains_do_not_reset_stagnation():
    space = toy_space()
    counter = {"n": 0}

    def creeping(config, seed):
        counter["n"] += 1
        return counter["n"] * 1e-5  # every evaluation improves, but below 0.002 per iteration

    result = optimize(space, creeping, OptimizerSettings(
        n_rsmpl=4, n_ants=2, aco_iterations=30, n_particles=2, pso_iterations=30, seed=1))
    assert result.phase_iterations["aco"] == 5
    assert result.phase_iterations["pso"] == 5


def test_failing_evaluations_abort_after_majority():
    space = toy_space()

    def broken(config, seed):
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError, match="systematically"):
        optimize(space, broken, OptimizerSettings(n_rsmpl=10, seed=0))


def test_sporadic_failures_are_logged_not_fatal():
    space = toy_space()
    target = {"depth": 2, "width": 4, "rate": 0.5}
    base = quadratic_fitness(space, target)
    calls = {"n": 0}

    def flaky(config, seed):
        calls["n"] += 1
        if calls["n"] % 7 == 0:
            raise RuntimeError("transient")
        return base(config, seed)

    result = optimize(space, flaky, OptimizerSettings(
        n_rsmpl=10, n_ants=4, aco_iterations=6, n_particles=4, pso_iterations=6, seed=5))
    assert result.n_failures > 0
    assert math.isfinite(result.best_fitness)
    failed_rows = [r for r in result.log if r.fitness == float("-inf")]
    assert len(failed_rows) == result.n_failures


def test_pheromones_stay_positive_under_negative_fitness():
    space = toy_space()
    fitness = quadratic_fitness(space, {"depth": 1, "width": 4, "rate": 0.0})
    settings = OptimizerSettings(n_rsmpl=6, n_ants=4, aco_iterations=10,
                                 n_particles=2, pso_iterations=2, seed=8)
    result = optimize(space, fitness, settings)
    assert result.best_fitness <= 0.0
    space.validate(result.best_config)


def test_mean_fitness_eta_mode_still_recovers():
    space = toy_space()
    target = {"depth": 3, "width": 8, "rate": 0.6}
    fitness = quadratic_fitness(space, target)
    result = optimize(space, fitness, OptimizerSettings(
        n_rsmpl=10, n_ants=6, aco_iterations=10, n_particles=4, pso_iterations=8,
        seed=21, eta_mode="mean_fitness"))
    assert result.best_config["depth"] == target["depth"]
    assert result.best_config["width"] == target["width"]


def test_settings_file_roundtrip(tmp_path):
    settings = OptimizerSettings(seed=42, n_ants=7)
    path = tmp_path / "optimizer.json"
    settings.save(path)
    loaded = OptimizerSettings.load(path)
    assert loaded == settings
    data = json.loads(path.read_text())
    assert data["alpha"] == 1.0 and data["beta"] == 2.0 and data["rho"] == 0.2
    assert data["w"] == 0.8 and data["c1"] == 1.2 and data["c2"] == 1.6


def test_log_csv_schema(tmp_path):
    space = toy_space()
    fitness = quadratic_fitness(space, {"depth": 2, "width": 8, "rate": 0.3})
    result = optimize(space, fitness, OptimizerSettings(
        n_rsmpl=5, n_ants=2, aco_iterations=2, n_particles=2, pso_iterations=2, seed=6))
    path = tmp_path / "log.csv"
    result.write_log(path)
    import csv
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"phase", "iteration", "agent", "config_json", "fitness", "seconds"}
    assert len(rows) == result.n_evaluations
    json.loads(rows[0]["config_json"])


def test_emitted_configs_always_within_bounds():
    space = SearchSpace()
    seen = []

    def recording(config, seed):
        seen.append(dict(config))
        return 0.5

    optimize(space, recording, OptimizerSettings(
        n_rsmpl=10, n_ants=5, aco_iterations=6, n_particles=5, pso_iterations=6, seed=12))
    from ddipred.mlp import MlpConfig
    for config in seen:
        space.validate(config)
        MlpConfig(**config)  # Table-3 construction must accept every emitted config

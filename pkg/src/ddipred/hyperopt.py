"""Three-stage hyperparameter search: random seeding, then ant-colony search
over the discrete dimensions, then particle-swarm refinement of the
continuous dimensions.

Discrete options are sampled from pheromone/heuristic transition
probabilities

    P_jv = tau_jv^alpha * eta_jv^beta / sum_k tau_jk^alpha * eta_jk^beta

with evaporation tau <- (1 - rho) tau and an elitist deposit on the
options chosen by the global best. Particles move by

    v' = w v + c1 r1 (p_best - x) + c2 r2 (g_best - x),   x' = x + v'

in normalized [0, 1] coordinates (learning rate on a log10 axis), with
positions clamped to bounds and velocities to +-1. Each iterative phase
stops early when the best fitness has not improved by at least 0.002 for
5 consecutive iterations. Fitness evaluations inside an iteration are
independent; results are committed in agent-index order, so the run is
deterministic for any worker count.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError

PHEROMONE_FLOOR = 1e-6

# Table-3 style defaults for the MLP search problem.
DEFAULT_DISCRETE = {
    "hidden_layers": (1, 2, 3, 4, 5),
    "neurons_per_layer": (64, 96, 128, 192, 256),
    "batch_size": (32, 64, 128),
    "optimizer": ("adam", "sgd"),
}
DEFAULT_CONTINUOUS = {
    "learning_rate": (1e-5, 1e-3, True),  # (lo, hi, log10 axis)
    "dropout": (0.1, 0.5, False),
}


@dataclass(frozen=True)
class SearchSpace:
    """Mixed discrete/continuous search space.

    discrete maps a dimension name to its option tuple; continuous maps a
    name to (lo, hi, log_scale). Log-scaled dimensions are sampled and
    normalized on a log10 axis.
    """

    discrete: dict = field(default_factory=lambda: dict(DEFAULT_DISCRETE))
    continuous: dict = field(default_factory=lambda: dict(DEFAULT_CONTINUOUS))

    def __post_init__(self):
        for name, options in self.discrete.items():
            if len(options) < 1:
                raise ConfigError(f"discrete dimension {name!r} has no options")
        for name, (lo, hi, _) in self.continuous.items():
            if not lo < hi:
                raise ConfigError(f"continuous dimension {name!r} has empty range")

    def continuous_to_unit(self, name: str, value: float) -> float:
        lo, hi, log_scale = self.continuous[name]
        if log_scale:
            return (math.log10(value) - math.log10(lo)) / (math.log10(hi) - math.log10(lo))
        return (value - lo) / (hi - lo)

    def unit_to_continuous(self, name: str, unit: float) -> float:
        lo, hi, log_scale = self.continuous[name]
        unit = min(max(unit, 0.0), 1.0)
        if log_scale:
            value = 10 ** (math.log10(lo) + unit * (math.log10(hi) - math.log10(lo)))
        else:
            value = lo + unit * (hi - lo)
        return min(max(value, lo), hi)

    def validate(self, config: dict) -> None:
        for name, options in self.discrete.items():
            if config.get(name) not in options:
                raise ConfigError(f"{name}={config.get(name)!r} not in {options}")
        for name, (lo, hi, _) in self.continuous.items():
            v = config.get(name)
            if v is None or not lo <= v <= hi:
                raise ConfigError(f"{name}={v!r} outside [{lo}, {hi}]")

    def sample(self, rng) -> dict:
        """Uniform draw: uniform options, uniform unit coordinate (log-uniform
        for log-scaled dimensions)."""
        config = {}
        for name, options in self.discrete.items():
            config[name] = options[int(rng.integers(len(options)))]
        for name in self.continuous:
            config[name] = self.unit_to_continuous(name, float(rng.random()))
        return config


@dataclass
class OptimizerSettings:
    n_rsmpl: int = 30
    top_seed: int = 5
    n_ants: int = 20
    aco_iterations: int = 25
    n_particles: int = 20
    pso_iterations: int = 25
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.2
    w: float = 0.8
    c1: float = 1.2
    c2: float = 1.6
    sigma_continuous: float = 0.1
    stagnation_eps: float = 0.002
    stagnation_window: int = 5
    deposit_floor: float = 0.5
    eta_mode: str = "uniform"  # "uniform" or "mean_fitness"
    seed: int = 13
    workers: int = 1

    def __post_init__(self):
        if self.n_rsmpl < 1 or self.n_ants < 1 or self.n_particles < 1:
            raise ConfigError("population sizes must be >= 1")
        if self.rho < 0 or self.rho > 1:
            raise ConfigError("rho must be in [0, 1]")
        if self.eta_mode not in ("uniform", "mean_fitness"):
            raise ConfigError(f"unknown eta_mode {self.eta_mode!r}")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def smoke(cls, **overrides) -> "OptimizerSettings":
        """Tiny budget for fixtures and smoke tests: 3 RSmpl, 2x2 ACO, 2x2 PSO."""
        base = dict(n_rsmpl=3, n_ants=2, aco_iterations=2, n_particles=2, pso_iterations=2)
        base.update(overrides)
        return cls(**base)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "OptimizerSettings":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))


@dataclass
class PheromoneMatrix:
    """Per-dimension pheromone and heuristic vectors."""

    tau: dict  # name -> np.ndarray over options
    eta: dict
    alpha: float
    beta: float
    rho: float

    @classmethod
    def fresh(cls, space: SearchSpace, alpha: float, beta: float, rho: float) -> "PheromoneMatrix":
        tau = {name: np.ones(len(opts)) for name, opts in space.discrete.items()}
        eta = {name: np.ones(len(opts)) for name, opts in space.discrete.items()}
        return cls(tau=tau, eta=eta, alpha=alpha, beta=beta, rho=rho)

    def deposit(self, space: SearchSpace, config: dict, amount: float) -> None:
        for name, options in space.discrete.items():
            self.tau[name][options.index(config[name])] += amount

    def evaporate(self) -> None:
        for name in self.tau:
            self.tau[name] = np.maximum((1.0 - self.rho) * self.tau[name], PHEROMONE_FLOOR)

    def floor(self) -> None:
        for name in self.tau:
            self.tau[name] = np.maximum(self.tau[name], PHEROMONE_FLOOR)


def aco_transition_probabilities(tau, eta, alpha: float, beta: float) -> np.ndarray:
    """P_v = tau_v^alpha * eta_v^beta, normalized to sum to 1."""
    tau = np.asarray(tau, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if tau.shape != eta.shape:
        raise ConfigError("tau/eta shape mismatch")
    if np.any(tau <= 0) or np.any(eta <= 0):
        raise ConfigError("tau and eta must be strictly positive")
    weights = tau**alpha * eta**beta
    return weights / weights.sum()


@dataclass
class Swarm:
    """Particle positions and velocities in normalized continuous coordinates."""

    positions: np.ndarray  # (n_particles, n_dims) in [0, 1]
    velocities: np.ndarray
    p_best_pos: np.ndarray
    p_best_fit: np.ndarray
    g_best_pos: np.ndarray
    g_best_fit: float
    w: float
    c1: float
    c2: float


def pso_step(swarm: Swarm, r1_vec, r2_vec) -> Swarm:
    """One kinematic swarm update; positions clamp to [0, 1], velocities to +-1.

    r1_vec/r2_vec are the uniform draws, shaped like the positions
    (injectable for tests). Fitness evaluation and best updates happen in
    the surrounding phase loop.
    """
    r1 = np.asarray(r1_vec, dtype=np.float64)
    r2 = np.asarray(r2_vec, dtype=np.float64)
    v = (
        swarm.w * swarm.velocities
        + swarm.c1 * r1 * (swarm.p_best_pos - swarm.positions)
        + swarm.c2 * r2 * (swarm.g_best_pos - swarm.positions)
    )
    v = np.clip(v, -1.0, 1.0)
    x = np.clip(swarm.positions + v, 0.0, 1.0)
    swarm.velocities = v
    swarm.positions = x
    return swarm


@dataclass
class LogRow:
    phase: str
    iteration: int
    agent: int
    config: dict
    fitness: float
    seconds: float


@dataclass
class OptimizerState:
    phase: str  # rsmpl | aco | pso | done
    pheromones: PheromoneMatrix
    swarm: Swarm | None
    best_config: dict
    best_fitness: float
    stagnation: int
    iteration: int
    agent_bests: list  # per-agent (config, fitness)
    log: list


@dataclass
class OptimizerResult:
    best_config: dict
    best_fitness: float
    log: list
    phase_iterations: dict
    n_evaluations: int
    n_failures: int

    def write_log(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["phase", "iteration", "agent", "config_json", "fitness", "seconds"])
            for row in self.log:
                writer.writerow(
                    [
                        row.phase,
                        row.iteration,
                        row.agent,
                        json.dumps(row.config, sort_keys=True),
                        repr(row.fitness),
                        f"{row.seconds:.6f}",
                    ]
                )


class _Evaluator:
    """Caches fitness by canonical config, logs every evaluation, tracks failures."""

    def __init__(self, space, fitness_fn, seed, workers, log):
        self.space = space
        self.fitness_fn = fitness_fn
        self.seed = seed
        self.workers = max(1, int(workers))
        self.log = log
        self.cache: dict = {}
        self.n_evaluations = 0
        self.n_failures = 0

    @staticmethod
    def key(config: dict) -> str:
        return json.dumps(config, sort_keys=True)

    def _run_one(self, config):
        start = time.perf_counter()
        try:
            fitness = float(self.fitness_fn(config, self.seed))
            failed = not math.isfinite(fitness)
        except Exception:
            fitness, failed = float("-inf"), True
        return fitness, failed, time.perf_counter() - start

    def evaluate(self, configs, phase: str, iteration: int) -> list:
        """Evaluate a batch, committing results in agent-index order."""
        for config in configs:
            self.space.validate(config)
        todo = []
        for config in configs:
            if self.key(config) not in self.cache:
                todo.append(config)
        if todo:
            if self.workers > 1:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    outcomes = list(pool.map(self._run_one, todo))
            else:
                outcomes = [self._run_one(c) for c in todo]
            for config, (fitness, failed, seconds) in zip(todo, outcomes):
                # first-write-wins for duplicate configs inside one batch
                self.cache.setdefault(self.key(config), (fitness, failed, seconds))
        fitnesses = []
        for agent, config in enumerate(configs):
            fitness, failed, seconds = self.cache[self.key(config)]
            self.n_evaluations += 1
            self.n_failures += int(failed)
            self.log.append(LogRow(phase, iteration, agent, dict(config), fitness, seconds))
            fitnesses.append(float("-inf") if failed else fitness)
        if self.n_evaluations >= 8 and self.n_failures > 0.5 * self.n_evaluations:
            raise RuntimeError(
                f"fitness evaluation failing systematically: "
                f"{self.n_failures}/{self.n_evaluations} evaluations failed"
            )
        return fitnesses


class _StagnationTracker:
    """Counts consecutive iterations without a >= eps gain in best fitness."""

    def __init__(self, eps: float, window: int):
        self.eps = eps
        self.window = window
        self.count = 0

    def update(self, previous_best: float, current_best: float) -> bool:
        """Returns True when the phase should halt."""
        gain = current_best - previous_best
        if math.isinf(previous_best) or gain >= self.eps:
            self.count = 0
        else:
            self.count += 1
        return self.count >= self.window


def rsmpl_seed(space: SearchSpace, n_configs: int, seed: int, fitness_fn, workers: int = 1, _evaluator=None):
    """Stage 1: evaluate n uniform random configurations, best first."""
    if n_configs < 1:
        raise ConfigError("n_configs must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    configs = [space.sample(rng) for _ in range(n_configs)]
    evaluator = _evaluator or _Evaluator(space, fitness_fn, seed, workers, [])
    fitnesses = evaluator.evaluate(configs, "rsmpl", 0)
    ranked = sorted(zip(configs, fitnesses), key=lambda t: -t[1])
    return ranked


def _mean_fitness_eta(space, stats) -> dict:
    """Optional heuristic: options scaled by their running mean fitness."""
    eta = {}
    for name, options in space.discrete.items():
        means = np.array(
            [stats[name][v][0] / stats[name][v][1] if stats[name][v][1] else np.nan for v in options]
        )
        if np.all(np.isnan(means)):
            eta[name] = np.ones(len(options))
            continue
        lo = np.nanmin(means)
        hi = np.nanmax(means)
        scaled = (means - lo) / (hi - lo) if hi > lo else np.zeros_like(means)
        scaled[np.isnan(scaled)] = 0.5
        eta[name] = np.maximum(scaled, PHEROMONE_FLOOR)
    return eta


def aco_phase(state: OptimizerState, space: SearchSpace, settings: OptimizerSettings, evaluator, rng):
    """Stage 2: discrete search by pheromone sampling, Gaussian continuous jitter."""
    tracker = _StagnationTracker(settings.stagnation_eps, settings.stagnation_window)
    option_stats = {name: {v: [0.0, 0] for v in opts} for name, opts in space.discrete.items()}
    iterations_run = 0
    for iteration in range(1, settings.aco_iterations + 1):
        state.iteration = iteration
        previous_best = state.best_fitness
        configs = []
        for _ in range(settings.n_ants):
            config = {}
            for name, options in space.discrete.items():
                probs = aco_transition_probabilities(
                    state.pheromones.tau[name], state.pheromones.eta[name], settings.alpha, settings.beta
                )
                config[name] = options[int(rng.choice(len(options), p=probs))]
            for name in space.continuous:
                center = space.continuous_to_unit(name, state.best_config[name])
                unit = float(np.clip(center + settings.sigma_continuous * rng.standard_normal(), 0.0, 1.0))
                config[name] = space.unit_to_continuous(name, unit)
            configs.append(config)
        fitnesses = evaluator.evaluate(configs, "aco", iteration)
        for agent, (config, fitness) in enumerate(zip(configs, fitnesses)):
            if fitness > state.agent_bests[agent][1]:
                state.agent_bests[agent] = (config, fitness)
            if fitness > state.best_fitness:
                state.best_fitness = fitness
                state.best_config = dict(config)
            if math.isfinite(fitness):
                for name in space.discrete:
                    entry = option_stats[name][config[name]]
                    entry[0] += fitness
                    entry[1] += 1
        state.pheromones.evaporate()
        state.pheromones.deposit(space, state.best_config, max(state.best_fitness, settings.deposit_floor))
        state.pheromones.floor()
        if settings.eta_mode == "mean_fitness":
            state.pheromones.eta = _mean_fitness_eta(space, option_stats)
        iterations_run = iteration
        if tracker.update(previous_best, state.best_fitness):
            break
    state.stagnation = tracker.count
    return iterations_run


def pso_phase(state: OptimizerState, space: SearchSpace, settings: OptimizerSettings, evaluator, rng):
    """Stage 3: refine continuous dimensions with the discrete cell frozen."""
    cont_names = list(space.continuous)
    if not cont_names:
        return 0
    n = settings.n_particles
    dims = len(cont_names)
    positions = rng.random((n, dims))
    positions[0] = [space.continuous_to_unit(name, state.best_config[name]) for name in cont_names]
    swarm = Swarm(
        positions=positions,
        velocities=np.zeros((n, dims)),
        p_best_pos=positions.copy(),
        p_best_fit=np.full(n, -np.inf),
        g_best_pos=positions[0].copy(),
        g_best_fit=state.best_fitness,
        w=settings.w,
        c1=settings.c1,
        c2=settings.c2,
    )
    state.swarm = swarm
    frozen = {name: state.best_config[name] for name in space.discrete}
    tracker = _StagnationTracker(settings.stagnation_eps, settings.stagnation_window)
    iterations_run = 0
    for iteration in range(1, settings.pso_iterations + 1):
        state.iteration = iteration
        previous_best = state.best_fitness
        r1 = rng.random((n, dims))
        r2 = rng.random((n, dims))
        pso_step(swarm, r1, r2)
        configs = []
        for i in range(n):
            config = dict(frozen)
            for j, name in enumerate(cont_names):
                config[name] = space.unit_to_continuous(name, float(swarm.positions[i, j]))
            configs.append(config)
        fitnesses = evaluator.evaluate(configs, "pso", iteration)
        for i, fitness in enumerate(fitnesses):
            if fitness > swarm.p_best_fit[i]:
                swarm.p_best_fit[i] = fitness
                swarm.p_best_pos[i] = swarm.positions[i].copy()
            if fitness > swarm.g_best_fit:
                swarm.g_best_fit = fitness
                swarm.g_best_pos = swarm.positions[i].copy()
                state.best_fitness = fitness
                state.best_config = configs[i]
        iterations_run = iteration
        if tracker.update(previous_best, state.best_fitness):
            break
    state.stagnation = tracker.count
    return iterations_run


def optimize(space: SearchSpace, fitness_fn, settings: OptimizerSettings) -> OptimizerResult:
    """Full RSmpl -> ACO -> PSO run; returns the global best and the evaluation log.

    fitness_fn(config, seed) must be deterministic for a given pair; results
    are cached by canonical config. Failed evaluations count as -inf and a
    systematic failure rate above 50% aborts the run.
    """
    log: list = []
    evaluator = _Evaluator(space, fitness_fn, settings.seed, settings.workers, log)
    seq = np.random.SeedSequence([int(settings.seed), 1])
    aco_rng, pso_rng = (np.random.default_rng(s) for s in seq.spawn(2))

    ranked = rsmpl_seed(space, settings.n_rsmpl, settings.seed, fitness_fn, _evaluator=evaluator)
    pheromones = PheromoneMatrix.fresh(space, settings.alpha, settings.beta, settings.rho)
    for config, fitness in ranked[: settings.top_seed]:
        pheromones.deposit(space, config, max(fitness, settings.deposit_floor))
    best_config, best_fitness = ranked[0]

    state = OptimizerState(
        phase="aco",
        pheromones=pheromones,
        swarm=None,
        best_config=dict(best_config),
        best_fitness=best_fitness,
        stagnation=0,
        iteration=0,
        agent_bests=[({}, -np.inf) for _ in range(settings.n_ants)],
        log=log,
    )
    aco_iters = aco_phase(state, space, settings, evaluator, aco_rng)
    state.phase = "pso"
    pso_iters = pso_phase(state, space, settings, evaluator, pso_rng)
    state.phase = "done"

    return OptimizerResult(
        best_config=state.best_config,
        best_fitness=state.best_fitness,
        log=log,
        phase_iterations={"aco": aco_iters, "pso": pso_iters},
        n_evaluations=evaluator.n_evaluations,
        n_failures=evaluator.n_failures,
    )

"""Envy sweeps, replicate ensembles and heterogeneous-envy runs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .analysis import (
    IDENTITY_TOLERANCE,
    PURITY_THRESHOLD,
    SUPPORT_THRESHOLD,
    ClassLabel,
    EquilibriumReport,
    classify,
)
from .dynamics import DynamicsReport, evolve, init_population
from .utility import EvaluatedState, ModelParams, UtilityProfile, Variant, build_option_grid, evaluate

ENVY_MODES = ("uniform", "per-agent-uniform")

# second entropy word for the per-agent envy draw, keeps it off the
# initial-strategy stream of the same seed
_ENVY_STREAM = 0x656E7679

OBSERVABLES = (
    "frac_pure1",
    "frac_pure2",
    "frac_mixed",
    "total_mixed_support_ratio",
    "mean_income",
    "mean_reward",
    "condensate_fraction",
    "n_mixed_clusters",
    "avg_mixed_support",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a run or a sweep.

    Replicate ``r`` uses seed ``base_seed + r`` unless ``seeds`` lists them
    explicitly; the same seeds are reused at every grid point.
    """

    agents: int = 100
    options: int = 100
    theta: float = 0.5
    kappa: float = 0.5
    epsilon: float = 0.0
    variant: Variant = Variant.INCOME_ENVY
    envy_mode: str = "uniform"
    fitness_offset: float = 20.0
    fitness_floor: float = 0.0
    iterations: int = 100_000
    log_guard: float = 1e-12
    stop_tol: Optional[float] = None
    epsilon_grid: Tuple[float, ...] = ()
    replicates: int = 1
    base_seed: int = 0
    seeds: Optional[Tuple[int, ...]] = None
    purity_threshold: float = PURITY_THRESHOLD
    support_threshold: float = SUPPORT_THRESHOLD
    identity_tolerance: float = IDENTITY_TOLERANCE

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        if self.seeds is not None:
            object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.envy_mode not in ENVY_MODES:
            raise ValueError(f"envy_mode must be one of {ENVY_MODES}, got {self.envy_mode!r}")
        if self.agents < 1:
            raise ValueError("agents must be >= 1")
        if self.options < 2:
            raise ValueError("options must be >= 2")
        if not 0 <= self.theta < 1:
            raise ValueError("theta must lie in [0, 1)")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.epsilon < 0 or any(e < 0 for e in self.epsilon_grid):
            raise ValueError("epsilon values must be >= 0")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.seeds is not None and len(self.seeds) < self.replicates:
            raise ValueError("fewer explicit seeds than replicates")

    def profile(self) -> UtilityProfile:
        return build_option_grid(self.options, self.theta)

    def replicate_seeds(self) -> List[int]:
        if self.seeds is not None:
            return list(self.seeds[: self.replicates])
        return [self.base_seed + r for r in range(self.replicates)]

    def draw_envy(self, epsilon: float, seed: int):
        """Scalar envy, or per-agent levels uniform on ``[0, 2 epsilon]``."""
        if self.envy_mode == "uniform":
            return float(epsilon)
        rng = np.random.default_rng([seed, _ENVY_STREAM])
        return tuple(rng.uniform(0.0, 2.0 * epsilon, self.agents))

    def model_params(self, epsilon: float, seed: int) -> ModelParams:
        return ModelParams(
            agent_count=self.agents,
            kappa=self.kappa,
            envy=self.draw_envy(epsilon, seed),
            variant=self.variant,
            fitness_offset=self.fitness_offset,
            fitness_floor=self.fitness_floor,
            iterations=self.iterations,
            seed=seed,
            log_guard=self.log_guard,
        )


class ExperimentError(RuntimeError):
    def __init__(self, epsilon: float, seed: int, cause: BaseException):
        self.epsilon = epsilon
        self.seed = seed
        self.cause = cause
        super().__init__(f"run failed at epsilon={epsilon}, seed={seed}: {cause}")


@dataclass
class RunResult:
    epsilon: float
    seed: int
    params: ModelParams
    dynamics: DynamicsReport
    report: EquilibriumReport
    state: EvaluatedState

    def observables(self) -> Dict[str, float]:
        rep = self.report
        fr = rep.strategy_fractions()
        return {
            "frac_pure1": fr[ClassLabel.PURE1],
            "frac_pure2": fr[ClassLabel.PURE2],
            "frac_mixed": fr[ClassLabel.MIXED],
            "total_mixed_support_ratio": rep.total_mixed_support_ratio,
            "mean_income": self.state.mean_income,
            "mean_reward": self.state.mean_reward,
            "condensate_fraction": rep.condensate_fraction,
            "n_mixed_clusters": float(len(rep.mixed_clusters)),
            "avg_mixed_support": rep.average_mixed_support,
        }


def run_experiment(config: ExperimentConfig, epsilon: float, seed: int) -> RunResult:
    """Initialize, evolve, evaluate and classify one population."""
    try:
        params = config.model_params(epsilon, seed)
        profile = config.profile()
        p0 = init_population(config.agents, config.options, seed)
        dyn = evolve(p0, profile, params, stop_tol=config.stop_tol)
        prev = dyn.final_rewards if params.variant is Variant.REWARD_ENVY else None
        state = evaluate(dyn.final_population, profile, params, prev)
        report = classify(
            dyn.final_population,
            state,
            purity_threshold=config.purity_threshold,
            identity_tolerance=config.identity_tolerance,
            support_threshold=config.support_threshold,
        )
    except Exception as exc:
        raise ExperimentError(epsilon, seed, exc) from exc
    return RunResult(epsilon, seed, params, dyn, report, state)


@dataclass
class SweepRecord:
    epsilon: float
    replicates: List[Dict[str, float]]
    seeds: List[int]
    failures: List[Tuple[int, str]] = field(default_factory=list)

    def mean(self, name: str) -> float:
        vals = [r[name] for r in self.replicates if not math.isnan(r[name])]
        return float(np.mean(vals)) if vals else float("nan")

    def sd(self, name: str) -> float:
        vals = [r[name] for r in self.replicates if not math.isnan(r[name])]
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else float("nan")

    def means(self) -> Dict[str, float]:
        return {k: self.mean(k) for k in OBSERVABLES}


Runner = Callable[[ExperimentConfig, float, int], RunResult]


def run_grid(
    config: ExperimentConfig,
    tasks: Sequence[Tuple[float, int]],
    threads: int = 1,
    runner: Runner = run_experiment,
) -> List[object]:
    """Run ``(epsilon, seed)`` tasks, returning results or exceptions in task order.

    The compiled kernel releases the GIL, so threads give real parallelism.
    """

    def one(task):
        try:
            return runner(config, *task)
        except ExperimentError as exc:
            return exc

    if threads <= 1:
        return [one(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, tasks))


def epsilon_sweep(
    config: ExperimentConfig,
    threads: int = 1,
    runner: Runner = run_experiment,
    keep_runs: bool = False,
):
    """Replicate ensemble at every grid point.

    Failed replicates are listed in ``SweepRecord.failures`` and left out of
    the means.  With ``keep_runs`` the individual ``RunResult`` objects are
    returned as a second value, in (epsilon, seed) order.
    """
    if not config.epsilon_grid:
        raise ValueError("epsilon_grid is empty")
    seeds = config.replicate_seeds()
    tasks = [(eps, s) for eps in config.epsilon_grid for s in seeds]
    results = run_grid(config, tasks, threads, runner)
    records = []
    runs = []
    for k, eps in enumerate(config.epsilon_grid):
        chunk = results[k * len(seeds) : (k + 1) * len(seeds)]
        rec = SweepRecord(epsilon=eps, replicates=[], seeds=[])
        for s, res in zip(seeds, chunk):
            if isinstance(res, ExperimentError):
                rec.failures.append((s, str(res.cause)))
                continue
            rec.replicates.append(res.observables())
            rec.seeds.append(s)
            runs.append(res)
        records.append(rec)
    return (records, runs) if keep_runs else records


@dataclass
class ScatterTable:
    envy: np.ndarray
    incomes: np.ndarray
    labels: List[ClassLabel]
    run: RunResult

    def class_interval(self, label: ClassLabel) -> Optional[Tuple[float, float]]:
        sel = [i for i, lab in enumerate(self.labels) if lab is label]
        if not sel:
            return None
        return float(self.incomes[sel].min()), float(self.incomes[sel].max())


def heterogeneous_scatter(
    config: ExperimentConfig, seed: int, epsilon: Optional[float] = None
) -> ScatterTable:
    """Per-agent ``(epsilon^alpha, I^alpha, class)`` for a per-agent-uniform run."""
    if config.envy_mode != "per-agent-uniform":
        raise ValueError("heterogeneous_scatter needs envy_mode='per-agent-uniform'")
    eps = config.epsilon if epsilon is None else epsilon
    run = run_experiment(config, eps, seed)
    return ScatterTable(
        envy=run.params.envy_vector(),
        incomes=np.asarray(run.state.agent_incomes),
        labels=list(run.report.labels),
        run=run,
    )


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    """Copy of ``config`` with the non-None ``changes`` applied."""
    return replace(config, **{k: v for k, v in changes.items() if v is not None})

"""Discrete replicator dynamics for the envy game.

``step`` is the plain numpy reference for one synchronous update;
``evolve`` runs the same map through the compiled kernel in
:mod:`envy_condensation._kernel`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from . import _kernel
from .utility import (
    EvaluatedState,
    ModelParams,
    UtilityProfile,
    Variant,
    check_population,
    evaluate,
    income_matrix,
)

_VARIANT_CODES = {
    Variant.INCOME_ENVY: _kernel.INCOME_ENVY,
    Variant.DIVIDE_THE_CAKE: _kernel.DIVIDE_THE_CAKE,
    Variant.REWARD_ENVY: _kernel.REWARD_ENVY,
}


class DegenerateStateError(RuntimeError):
    """An agent's fitness-weighted strategy sum vanished, or (``agent`` None)
    the mean income turned nonpositive while envy is switched on."""

    def __init__(self, agent: Optional[int], iteration: Optional[int] = None):
        self.agent = agent
        self.iteration = iteration
        where = f" at iteration {iteration}" if iteration is not None else ""
        if agent is None:
            msg = "mean income is not positive, envy term undefined"
        else:
            msg = f"agent {agent} has zero total fitness on its support"
        super().__init__(msg + where)


@dataclass
class DynamicsReport:
    final_population: np.ndarray
    iterations_run: int
    max_step_delta: float
    final_rewards: np.ndarray
    trajectory_samples: Optional[List[Tuple[int, dict]]] = None


@dataclass
class StabilityReport:
    population: np.ndarray
    drift: np.ndarray
    label_changes: int

    @property
    def max_drift(self) -> float:
        return float(self.drift.max()) if self.drift.size else 0.0


def init_population(agent_count: int, option_count: int, seed: int) -> np.ndarray:
    """Uniform [0, 1) entries from a seeded PCG64 stream, rows normalized."""
    if agent_count < 1 or option_count < 1:
        raise ValueError("agent_count and option_count must be >= 1")
    rng = np.random.default_rng(seed)
    p = rng.random((agent_count, option_count))
    return p / p.sum(axis=1, keepdims=True)


def initial_rewards(population: np.ndarray, profile: UtilityProfile, params: ModelParams) -> np.ndarray:
    """Lagged rewards used for the very first reward-envy step.

    No reward history exists at t = 0, so the agents' incomes stand in for it.
    """
    p = np.asarray(population, dtype=float)
    return (income_matrix(p, profile, params) * p).sum(axis=1)


def step(
    population: np.ndarray,
    profile: UtilityProfile,
    params: ModelParams,
    previous_rewards: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, EvaluatedState]:
    """One synchronous replicator update; returns the new population and the
    evaluation of the *input* population that drove it."""
    p = check_population(population, profile.option_count)
    with np.errstate(divide="ignore", invalid="ignore"):
        state = evaluate(p, profile, params, previous_rewards)
    ref = state.mean_income if previous_rewards is None else float(np.mean(previous_rewards))
    if not ref > 0 and np.any(params.envy_vector() != 0):
        raise DegenerateStateError(None)
    fitness = np.maximum(state.option_rewards + params.fitness_offset, params.fitness_floor)
    weighted = p * fitness
    totals = weighted.sum(axis=1)
    bad = np.flatnonzero(~(totals > 0))
    if bad.size:
        raise DegenerateStateError(int(bad[0]))
    new = weighted / totals[:, None]
    new[new < _kernel.FLUSH_BELOW] = 0.0
    return new, state


def evolve(
    population: np.ndarray,
    profile: UtilityProfile,
    params: ModelParams,
    *,
    stop_tol: Optional[float] = None,
    sample_every: Optional[int] = None,
    previous_rewards: Optional[np.ndarray] = None,
) -> DynamicsReport:
    """Iterate the replicator map ``params.iterations`` times.

    ``stop_tol`` enables an early stop once the largest entry change of a
    step drops below it.  ``sample_every`` records mean income and reward
    every that many steps.
    """
    p = np.array(check_population(population, profile.option_count), dtype=np.float64, order="C")
    if p.shape[0] != params.agent_count:
        raise ValueError(f"population has {p.shape[0]} agents, params expect {params.agent_count}")
    if previous_rewards is None:
        if params.variant is Variant.REWARD_ENVY:
            rewards = initial_rewards(p, profile, params)
        else:
            rewards = np.zeros(p.shape[0])
    else:
        rewards = np.array(previous_rewards, dtype=np.float64)
    v = np.ascontiguousarray(profile.bare_utilities, dtype=np.float64)
    envy = params.envy_vector()
    code = _VARIANT_CODES[params.variant]
    tol = float(stop_tol) if stop_tol else 0.0

    samples: Optional[list] = [] if sample_every else None
    chunk = int(sample_every) if sample_every else params.iterations
    done = 0
    delta = 0.0
    while done < params.iterations:
        n = min(chunk, params.iterations - done)
        ran, delta, bad = _kernel.run_steps(
            p, rewards, v, float(params.kappa), envy, code,
            float(params.fitness_offset), float(params.fitness_floor),
            float(params.log_guard), n, tol,
        )
        done += ran
        if bad >= 0:
            raise DegenerateStateError(None if bad == p.shape[0] else int(bad), done)
        if samples is not None:
            prev = rewards if params.variant is Variant.REWARD_ENVY else None
            st = evaluate(p, profile, params, prev)
            samples.append(
                (done, {"mean_income": st.mean_income, "mean_reward": st.mean_reward, "step_delta": delta})
            )
        if ran < n:
            break
    return DynamicsReport(
        final_population=p,
        iterations_run=done,
        max_step_delta=float(delta),
        final_rewards=rewards,
        trajectory_samples=samples,
    )


def perturb_and_retest(
    population: np.ndarray,
    profile: UtilityProfile,
    params: ModelParams,
    magnitude: float,
    relax_iterations: int,
    seed: int,
    *,
    previous_rewards: Optional[np.ndarray] = None,
) -> StabilityReport:
    """Kick every entry by uniform noise in ``[-magnitude, magnitude]`` and relax.

    Drift is measured against the unperturbed population relaxed for the same
    number of steps, so a zero kick gives exactly zero drift.
    """
    from .analysis import classify

    if magnitude < 0:
        raise ValueError("magnitude must be >= 0")
    p = check_population(population, profile.option_count)
    rng = np.random.default_rng(seed)
    if magnitude > 0:
        kicked = np.clip(p + rng.uniform(-magnitude, magnitude, size=p.shape), 0.0, None)
        kicked /= kicked.sum(axis=1, keepdims=True)
    else:
        kicked = p.copy()

    relax = replace(params, iterations=int(relax_iterations))
    ref = evolve(p, profile, relax, previous_rewards=previous_rewards)
    out = evolve(kicked, profile, relax, previous_rewards=previous_rewards)
    drift = np.abs(ref.final_population - out.final_population).max(axis=1)

    def labels(rep: DynamicsReport) -> np.ndarray:
        prev = rep.final_rewards if params.variant is Variant.REWARD_ENVY else None
        st = evaluate(rep.final_population, profile, params, prev)
        return np.array([lab.value for lab in classify(rep.final_population, st).labels])

    changes = int(np.sum(labels(ref) != labels(out)))
    return StabilityReport(population=out.final_population, drift=drift, label_changes=changes)

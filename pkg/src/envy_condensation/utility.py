"""Static model data and the payoff / reward equations.

Populations are plain ``(M, N)`` float arrays: row ``alpha`` is the mixed
strategy of agent ``alpha`` over the ``N`` options.  The array helpers in
this module broadcast over leading batch axes, which the Nash checker uses
to score many candidate deviations at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

ROW_SUM_TOL = 1e-9


class Variant(str, enum.Enum):
    """Which income / envy formula the game uses."""

    INCOME_ENVY = "income-envy"
    DIVIDE_THE_CAKE = "divide-the-cake"
    REWARD_ENVY = "reward-envy"

    @classmethod
    def parse(cls, value: Union[str, "Variant"]) -> "Variant":
        try:
            return cls(value)
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown variant {value!r}; expected one of {names}") from None


@dataclass(frozen=True, eq=False)
class UtilityProfile:
    """Option grid ``q_i`` and bare utilities ``v_i``."""

    theta: float
    qualities: np.ndarray
    bare_utilities: np.ndarray

    @property
    def option_count(self) -> int:
        return int(self.qualities.shape[0])


def build_option_grid(option_count: int, theta: float) -> UtilityProfile:
    """Equidistant qualities on [0, 1] and ``v(q) = (1 + q) / (1 - theta q)``.

    >>> build_option_grid(3, 0.5).bare_utilities
    array([1., 2., 4.])
    """
    if int(option_count) != option_count or option_count < 2:
        raise ValueError(f"option_count must be an integer >= 2, got {option_count!r}")
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must lie in [0, 1), got {theta!r}")
    q = np.arange(option_count, dtype=float) / (option_count - 1)
    v = (1.0 + q) / (1.0 - theta * q)
    # pin the endpoints so v_1 = 1 and v_N = 2/(1-theta) hold exactly
    v[0] = 1.0
    v[-1] = 2.0 / (1.0 - theta)
    q.setflags(write=False)
    v.setflags(write=False)
    return UtilityProfile(theta=float(theta), qualities=q, bare_utilities=v)


@dataclass(frozen=True)
class ModelParams:
    """Game and dynamics constants.

    ``envy`` is either one scalar shared by all agents or a per-agent tuple of
    length ``agent_count``.  Arrays passed in are converted to tuples so the
    params stay hashable and comparable.
    """

    agent_count: int
    kappa: float = 0.5
    envy: Union[float, tuple] = 0.0
    variant: Variant = Variant.INCOME_ENVY
    fitness_offset: float = 20.0
    fitness_floor: float = 0.0
    iterations: int = 100_000
    seed: int = 0
    log_guard: float = 1e-12

    def __post_init__(self) -> None:
        if int(self.agent_count) != self.agent_count or self.agent_count < 1:
            raise ValueError(f"agent_count must be a positive integer, got {self.agent_count!r}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa!r}")
        if np.ndim(self.envy) == 0:
            envy: Union[float, tuple] = float(self.envy)
            if envy < 0:
                raise ValueError(f"envy must be >= 0, got {envy!r}")
        else:
            envy = tuple(float(e) for e in np.asarray(self.envy, dtype=float).ravel())
            if len(envy) != self.agent_count:
                raise ValueError(
                    f"per-agent envy has {len(envy)} entries, expected {self.agent_count}"
                )
            if min(envy) < 0:
                raise ValueError("per-agent envy entries must be >= 0")
        object.__setattr__(self, "envy", envy)
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.fitness_floor > self.fitness_offset:
            raise ValueError("fitness_floor must not exceed fitness_offset")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not self.log_guard > 0:
            raise ValueError("log_guard must be positive")

    def envy_vector(self) -> np.ndarray:
        """Per-agent envy as a float array of length ``agent_count``."""
        if isinstance(self.envy, tuple):
            return np.array(self.envy, dtype=float)
        return np.full(self.agent_count, self.envy, dtype=float)


@dataclass(frozen=True, eq=False)
class EvaluatedState:
    option_incomes: np.ndarray
    agent_incomes: np.ndarray
    mean_income: float
    option_rewards: np.ndarray
    agent_rewards: np.ndarray
    mean_reward: float
    envy_terms: np.ndarray
    participation: np.ndarray
    occupations: np.ndarray


def check_population(population: np.ndarray, option_count: Optional[int] = None) -> np.ndarray:
    """Validate an ``(M, N)`` row-stochastic matrix and return it as float array."""
    p = np.asarray(population, dtype=float)
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
        raise ValueError(f"population must be a non-empty 2-d array, got shape {p.shape}")
    if option_count is not None and p.shape[1] != option_count:
        raise ValueError(f"population has {p.shape[1]} options, profile has {option_count}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("population entries must be finite and non-negative")
    bad = np.flatnonzero(np.abs(p.sum(axis=1) - 1.0) > ROW_SUM_TOL)
    if bad.size:
        raise ValueError(f"rows {bad[:5].tolist()} do not sum to 1")
    return p


def occupations(population: np.ndarray) -> np.ndarray:
    """Mean number of agents on each option, ``N_i = sum_beta p_i^beta``."""
    return np.asarray(population, dtype=float).sum(axis=-2)


def participation_ratio(strategy: np.ndarray) -> float:
    """``sum_i p_i^2``; 1 for a pure strategy, ``1/|S|`` for uniform support S."""
    s = np.asarray(strategy, dtype=float)
    return float(np.dot(s, s))


def _income_matrix(p: np.ndarray, v: np.ndarray, kappa: float, variant: Variant) -> np.ndarray:
    # competitors on option i as seen by agent alpha: N_i - p_i^alpha
    others = occupations(p)[..., None, :] - p
    if variant is Variant.INCOME_ENVY:
        return v * (1.0 - kappa * others)
    if variant is Variant.REWARD_ENVY:
        return v - kappa * others
    return v / (1.0 + others)


def income_matrix(
    population: np.ndarray, profile: UtilityProfile, params: ModelParams
) -> np.ndarray:
    """Monetary payoff ``I_i^alpha`` of every option for every agent.

    Entries may be negative for overcrowded options; flooring only happens in
    the dynamics.
    """
    p = np.asarray(population, dtype=float)
    if p.shape[-1] != profile.option_count:
        raise ValueError(f"population has {p.shape[-1]} options, profile has {profile.option_count}")
    return _income_matrix(p, profile.bare_utilities, params.kappa, params.variant)


def _evaluate_arrays(
    p: np.ndarray,
    v: np.ndarray,
    kappa: float,
    envy: np.ndarray,
    variant: Variant,
    log_guard: float,
    previous_rewards: Optional[np.ndarray] = None,
) -> dict:
    """Batched evaluation over leading axes of ``p`` (shape ``(..., M, N)``)."""
    inc = _income_matrix(p, v, kappa, variant)
    agent_inc = np.einsum("...i,...i->...", inc, p)
    mean_inc = agent_inc.mean(axis=-1)
    if variant is Variant.REWARD_ENVY:
        if previous_rewards is None:
            raise ValueError("reward-envy evaluation needs previous_rewards")
        prev = np.asarray(previous_rewards, dtype=float)
        ratio = prev / prev.mean(axis=-1)[..., None]
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = agent_inc / mean_inc[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.log(np.maximum(ratio, log_guard))
    # zero envy contributes exactly nothing, even where the log is undefined
    envy_scale = np.where(envy != 0, envy * log_ratio, 0.0)
    rewards = inc + envy_scale[..., None] * p
    agent_rew = np.einsum("...i,...i->...", rewards, p)
    p2 = np.einsum("...i,...i->...", p, p)
    return dict(
        option_incomes=inc,
        agent_incomes=agent_inc,
        mean_income=mean_inc,
        option_rewards=rewards,
        agent_rewards=agent_rew,
        mean_reward=agent_rew.mean(axis=-1),
        envy_terms=envy_scale * p2,
        participation=p2,
        occupations=occupations(p),
    )


def evaluate(
    population: np.ndarray,
    profile: UtilityProfile,
    params: ModelParams,
    previous_rewards: Optional[Sequence[float]] = None,
) -> EvaluatedState:
    """Incomes, rewards and envy of every agent for one population.

    For the reward-envy variant the envy log uses ``previous_rewards`` (the
    agent rewards of the preceding dynamics step) instead of incomes.
    """
    p = check_population(population, profile.option_count)
    if p.shape[0] != params.agent_count:
        raise ValueError(f"population has {p.shape[0]} agents, params expect {params.agent_count}")
    if previous_rewards is not None:
        previous_rewards = np.asarray(previous_rewards, dtype=float)
        if previous_rewards.shape != (p.shape[0],):
            raise ValueError("previous_rewards must have one entry per agent")
    out = _evaluate_arrays(
        p,
        profile.bare_utilities,
        params.kappa,
        params.envy_vector(),
        params.variant,
        params.log_guard,
        previous_rewards,
    )
    out["mean_income"] = float(out["mean_income"])
    out["mean_reward"] = float(out["mean_reward"])
    return EvaluatedState(**out)

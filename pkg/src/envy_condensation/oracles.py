"""Independent reference computations used to cross-check the main model.

* pairwise envy, where every agent compares itself to every other agent
  instead of to the population mean;
* exhaustive enumeration of pure Nash equilibria for tiny envy-free games,
  and a check that replicator fixed points land on one of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .dynamics import evolve, init_population
from .utility import ModelParams, UtilityProfile, _income_matrix

# a unilateral move must gain more than this to count as an improvement
IMPROVEMENT_EPS = 1e-12


@dataclass
class EnvyComparison:
    pairwise: np.ndarray
    mean_field: np.ndarray
    max_abs_difference: float
    income_spread: float


def _positive_incomes(incomes) -> np.ndarray:
    inc = np.asarray(incomes, dtype=float)
    if inc.ndim != 1 or inc.size < 2:
        raise ValueError("need a vector of at least two incomes")
    if np.any(inc <= 0):
        raise ValueError("incomes must be positive")
    return inc


def pairwise_envy(incomes, epsilon: Union[float, np.ndarray]) -> np.ndarray:
    """``(eps / M) * sum_{beta != alpha} log(I_alpha / I_beta)`` per agent."""
    inc = _positive_incomes(incomes)
    logs = np.log(inc)
    diff = logs[:, None] - logs[None, :]
    return np.asarray(epsilon, dtype=float) / inc.size * diff.sum(axis=1)


def compare_envy_formulations(incomes, epsilon: Union[float, np.ndarray]) -> EnvyComparison:
    inc = _positive_incomes(incomes)
    mean = inc.mean()
    pair = pairwise_envy(inc, epsilon)
    field = np.asarray(epsilon, dtype=float) * np.log(inc / mean)
    field = np.broadcast_to(field, pair.shape).copy()
    return EnvyComparison(
        pairwise=pair,
        mean_field=field,
        max_abs_difference=float(np.abs(pair - field).max()),
        income_spread=float(np.abs(inc - mean).max() / mean),
    )


def brute_force_pure_nash(
    profile: UtilityProfile,
    params: ModelParams,
    max_size_guard: int = 10**6,
    chunk: int = 4096,
) -> List[Tuple[int, ...]]:
    """All pure assignments (option index per agent) with no profitable
    unilateral pure move, in lexicographic order.  Envy-free games only."""
    if np.any(params.envy_vector() != 0):
        raise ValueError("pure Nash enumeration is defined for epsilon = 0 only")
    M, N = params.agent_count, profile.option_count
    total = N**M
    if total > max_size_guard:
        raise ValueError(f"{N}^{M} = {total} profiles exceeds the size guard {max_size_guard}")
    v = profile.bare_utilities
    found: List[Tuple[int, ...]] = []
    eye = np.eye(N)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        # most significant digit is agent 0, so codes run lexicographically
        choice = (codes[:, None] // N ** np.arange(M - 1, -1, -1)[None, :]) % N
        pop = eye[choice]
        inc = _income_matrix(pop, v, params.kappa, params.variant)
        held = np.take_along_axis(inc, choice[..., None], axis=-1)[..., 0]
        stable = np.all(inc.max(axis=-1) <= held + IMPROVEMENT_EPS, axis=-1)
        found.extend(tuple(int(x) for x in row) for row in choice[stable])
    return found


@dataclass
class FixedPointCheck:
    seed: int
    assignment: Tuple[int, ...]
    min_purity: float  # below 1 when payoff ties leave an agent mixed
    is_nash: bool
    equilibria: int


def check_fixed_point(
    profile: UtilityProfile,
    params: ModelParams,
    seed: int,
    equilibria: Optional[Sequence[Tuple[int, ...]]] = None,
) -> FixedPointCheck:
    """Evolve from ``seed``, round each agent to its most likely option and
    look the assignment up among the enumerated pure equilibria.

    With exact payoff ties (e.g. sharing a top option pays the same as being
    alone on the next one) the dynamics stop on a continuum of mixed
    equilibria; every rounding of such a point is still a pure equilibrium.
    """
    if equilibria is None:
        equilibria = brute_force_pure_nash(profile, params)
    p0 = init_population(params.agent_count, profile.option_count, seed)
    p = evolve(p0, profile, params).final_population
    assignment = tuple(int(i) for i in p.argmax(axis=1))
    return FixedPointCheck(
        seed=seed,
        assignment=assignment,
        min_purity=float(p.max(axis=1).min()),
        is_nash=assignment in set(equilibria),
        equilibria=len(equilibria),
    )

"""Classification of converged populations into strategy classes.

Pure agents sit (almost) entirely on one option: ``Pure1`` when no other
pure agent shares it, ``Pure2`` otherwise.  Everybody else is ``Mixed``.
Numerically identical strategies are grouped by single linkage under the
L1 distance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from .utility import (
    EvaluatedState,
    ModelParams,
    UtilityProfile,
    Variant,
    _evaluate_arrays,
    check_population,
)

PURITY_THRESHOLD = 0.999
SUPPORT_THRESHOLD = 1e-6
IDENTITY_TOLERANCE = 0.2


class ClassLabel(str, enum.Enum):
    PURE1 = "pure-1"
    PURE2 = "pure-2"
    MIXED = "mixed"


@dataclass
class StrategyCluster:
    representative: np.ndarray
    members: Tuple[int, ...]
    label: ClassLabel
    support: Tuple[int, ...]
    member_rows: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def max_pairwise_distance(self) -> float:
        """Largest L1 distance between two member strategies."""
        return _max_pairwise(self.member_rows)


@dataclass
class EquilibriumReport:
    labels: List[ClassLabel]
    supports: List[Tuple[int, ...]]
    clusters: List[StrategyCluster]
    type_counts: Dict[ClassLabel, Tuple[int, int]]
    condensate_fraction: float
    total_mixed_support_ratio: float
    income_gap: Optional[float]
    crowded_options: List[int]

    @property
    def mixed_clusters(self) -> List[StrategyCluster]:
        return [c for c in self.clusters if c.label is ClassLabel.MIXED]

    @property
    def average_mixed_support(self) -> float:
        """Mean support size over distinct mixed strategies (nan if none)."""
        mixed = self.mixed_clusters
        if not mixed:
            return float("nan")
        return float(np.mean([len(c.support) for c in mixed]))

    def largest_mixed_cluster(self) -> Optional[StrategyCluster]:
        mixed = self.mixed_clusters
        return max(mixed, key=lambda c: (c.size, -c.members[0])) if mixed else None

    def strategy_fractions(self) -> Dict[ClassLabel, float]:
        """Share of each class among all distinct strategies."""
        total = sum(ns for ns, _ in self.type_counts.values())
        return {lab: ns / total for lab, (ns, _) in self.type_counts.items()}


def _max_pairwise(rows: np.ndarray) -> float:
    if rows.shape[0] < 2:
        return 0.0
    return float(pdist(rows, "cityblock").max())


def support(strategy: Sequence[float], threshold: float = SUPPORT_THRESHOLD) -> Tuple[int, ...]:
    """Options played with probability at least ``threshold`` (0-based)."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    idx = np.flatnonzero(np.asarray(strategy, dtype=float) >= threshold)
    if idx.size == 0:
        raise ValueError("empty support: strategy row is not normalized")
    return tuple(int(i) for i in idx)


def pure_labels(population: np.ndarray, purity_threshold: float = PURITY_THRESHOLD):
    """Class label per agent plus the options holding more than two pure agents."""
    p = np.asarray(population, dtype=float)
    pure = p.max(axis=1) >= purity_threshold
    top = p.argmax(axis=1)
    counts = np.bincount(top[pure], minlength=p.shape[1])
    labels = []
    for a in range(p.shape[0]):
        if not pure[a]:
            labels.append(ClassLabel.MIXED)
        elif counts[top[a]] >= 2:
            labels.append(ClassLabel.PURE2)
        else:
            labels.append(ClassLabel.PURE1)
    crowded = [int(k) for k in np.flatnonzero(counts > 2)]
    return labels, crowded


def cluster_strategies(rows: np.ndarray, tolerance: float) -> np.ndarray:
    """Single-linkage component index of each row under ``L1 < tolerance``."""
    if rows.shape[0] == 1:
        return np.zeros(1, dtype=int)
    linked = squareform(pdist(rows, "cityblock")) < tolerance
    _, comp = connected_components(linked, directed=False)
    return comp


def classify(
    population: np.ndarray,
    evaluated: EvaluatedState,
    purity_threshold: float = PURITY_THRESHOLD,
    identity_tolerance: float = IDENTITY_TOLERANCE,
    support_threshold: float = SUPPORT_THRESHOLD,
) -> EquilibriumReport:
    p = check_population(population)
    M, N = p.shape
    labels, crowded = pure_labels(p, purity_threshold)
    supports = [support(row, support_threshold) for row in p]
    lab_arr = np.array([lab.value for lab in labels])

    clusters: List[StrategyCluster] = []
    for lab in ClassLabel:
        members = np.flatnonzero(lab_arr == lab.value)
        if members.size == 0:
            continue
        comp = cluster_strategies(p[members], identity_tolerance)
        for c in np.unique(comp):
            idx = members[comp == c]
            rows = p[idx]
            rep = rows.mean(axis=0)
            clusters.append(
                StrategyCluster(
                    representative=rep,
                    members=tuple(int(i) for i in idx),
                    label=lab,
                    support=support(rep, support_threshold),
                    member_rows=rows,
                )
            )
    clusters.sort(key=lambda c: (list(ClassLabel).index(c.label), c.members[0]))

    type_counts = {}
    for lab in ClassLabel:
        mine = [c for c in clusters if c.label is lab]
        type_counts[lab] = (len(mine), sum(c.size for c in mine))

    mixed = [c for c in clusters if c.label is ClassLabel.MIXED]
    condensate = max((c.size for c in mixed), default=0) / M
    mixed_support = sum(len(c.support) for c in mixed) / N

    inc = np.asarray(evaluated.agent_incomes)
    gap = None
    if type_counts[ClassLabel.PURE2][1] and type_counts[ClassLabel.MIXED][1]:
        gap = float(inc[lab_arr == ClassLabel.PURE2.value].min() - inc[lab_arr == ClassLabel.MIXED.value].max())

    return EquilibriumReport(
        labels=labels,
        supports=supports,
        clusters=clusters,
        type_counts=type_counts,
        condensate_fraction=condensate,
        total_mixed_support_ratio=mixed_support,
        income_gap=gap,
        crowded_options=crowded,
    )


@dataclass
class IncomeGapProfile:
    order: np.ndarray
    incomes: np.ndarray
    labels: List[ClassLabel]
    class_gap: Optional[float]
    largest_gap: float
    largest_gap_after: int


def income_gap_profile(incomes: Sequence[float], labels: Sequence[ClassLabel]) -> IncomeGapProfile:
    """Sorted income spectrum and the gaps that separate the classes.

    ``class_gap`` is ``min(I | pure-2) - max(I | mixed)``, or None when one
    of the two classes is empty.  ``largest_gap_after`` is the position in
    the sorted spectrum right before the widest adjacent gap.
    """
    inc = np.asarray(incomes, dtype=float)
    labels = [ClassLabel(lab) for lab in labels]
    if len(labels) != inc.size:
        raise ValueError("incomes and labels differ in length")
    order = np.argsort(inc, kind="stable")
    ranked = inc[order]
    diffs = np.diff(ranked)
    at = int(diffs.argmax()) if diffs.size else 0
    pure2 = [x for x, lab in zip(inc, labels) if lab is ClassLabel.PURE2]
    mixed = [x for x, lab in zip(inc, labels) if lab is ClassLabel.MIXED]
    gap = float(min(pure2) - max(mixed)) if pure2 and mixed else None
    return IncomeGapProfile(
        order=order,
        incomes=ranked,
        labels=[labels[i] for i in order],
        class_gap=gap,
        largest_gap=float(diffs[at]) if diffs.size else 0.0,
        largest_gap_after=at,
    )


@dataclass
class NashReport:
    worst_improvement: float
    worst_agent: int
    worst_kind: str
    worst_option: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_improvement <= self.tolerance


def _candidate_rows(row: np.ndarray, step_size: float) -> Tuple[np.ndarray, List[Tuple[str, int]]]:
    N = row.size
    eye = np.eye(N)
    towards = (1.0 - step_size) * row + step_size * eye
    away = []
    tags: List[Tuple[str, int]] = [("pure", k) for k in range(N)] + [("local", k) for k in range(N)]
    for i in np.flatnonzero((row > 0) & (row < 1)):
        x = row.copy()
        x[i] *= 1.0 - step_size
        away.append(x / x.sum())
        tags.append(("local", int(i)))
    rows = np.vstack([eye, towards] + ([np.array(away)] if away else []))
    return rows, tags


def nash_check(
    population: np.ndarray,
    profile: UtilityProfile,
    params: ModelParams,
    deviation_tolerance: float = 1e-6,
    *,
    step_size: float = 1e-4,
    previous_rewards: Optional[np.ndarray] = None,
    batch_elements: int = 2_000_000,
) -> NashReport:
    """Largest reward gain any agent can get by changing only its own row.

    Each agent tries every pure strategy and small simplex-preserving moves
    (mixing ``step_size`` towards each option, shaving ``step_size`` off each
    supported option).  The rest of the population stays fixed, but the mean
    income it is compared against is recomputed.

    For reward-envy the lagged reward vector is iterated to self-consistency
    for each candidate, starting from ``previous_rewards``.
    """
    p = check_population(population, profile.option_count)
    M, N = p.shape
    v = profile.bare_utilities
    envy = params.envy_vector()
    reward_envy = params.variant is Variant.REWARD_ENVY

    def rewards(batch: np.ndarray, prev: Optional[np.ndarray]) -> np.ndarray:
        if not reward_envy:
            out = _evaluate_arrays(batch, v, params.kappa, envy, params.variant, params.log_guard)
            return out["agent_rewards"]
        r = np.broadcast_to(prev, batch.shape[:-1]).copy()
        for _ in range(30):
            out = _evaluate_arrays(batch, v, params.kappa, envy, params.variant, params.log_guard, r)
            if np.allclose(out["agent_rewards"], r, rtol=0, atol=1e-13):
                break
            r = out["agent_rewards"]
        return out["agent_rewards"]

    prev = None
    if reward_envy:
        if previous_rewards is None:
            raise ValueError("reward-envy nash_check needs previous_rewards")
        prev = rewards(p, np.asarray(previous_rewards, dtype=float))
    base = rewards(p, prev)

    worst = (-np.inf, -1, "pure", -1)
    per_batch = max(1, batch_elements // (M * N))
    for a in range(M):
        cands, tags = _candidate_rows(p[a], step_size)
        for lo in range(0, cands.shape[0], per_batch):
            chunk = cands[lo : lo + per_batch]
            batch = np.broadcast_to(p, (chunk.shape[0], M, N)).copy()
            batch[:, a, :] = chunk
            gain = rewards(batch, prev)[:, a] - base[a]
            j = int(gain.argmax())
            if gain[j] > worst[0]:
                kind, opt = tags[lo + j]
                worst = (float(gain[j]), a, kind, opt)
    return NashReport(
        worst_improvement=worst[0],
        worst_agent=worst[1],
        worst_kind=worst[2],
        worst_option=worst[3],
        tolerance=deviation_tolerance,
    )

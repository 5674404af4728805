"""Responder side of the ultimatum game with envy.

The responder is offered a share ``s`` of a unit cake and compares it to the
fair share 1/2:  ``R(s) = s + epsilon * log(2 s)``.  Offers with ``R > 0``
are accepted, so the lowest accepted offer is the root of ``R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

FAIR_SHARE = 0.5
DEFAULT_GRID = tuple(np.linspace(0.0, 5.0, 51))


@dataclass(frozen=True)
class UltimatumSolution:
    epsilon: float
    threshold: float
    reward_at_threshold: float


def responder_reward(s: float, epsilon: float) -> float:
    if not s > 0:
        raise ValueError(f"offer must be positive, got {s!r}")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    return s + epsilon * math.log(s / FAIR_SHARE)


def acceptance_threshold(epsilon: float) -> UltimatumSolution:
    """Lowest offer the responder accepts.

    R is strictly increasing on (0, 1/2], diverges to -inf at 0 and equals
    1/2 at the fair share, so the root is bracketed; bisection runs until the
    bracket cannot be split any further in double precision.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if epsilon == 0:
        return UltimatumSolution(0.0, 0.0, 0.0)
    lo, hi = 0.0, FAIR_SHARE
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if responder_reward(mid, epsilon) < 0:
            lo = mid
        else:
            hi = mid
    # pick the bracket end with the smaller residual; lo can still be 0
    s = hi if lo == 0 or abs(responder_reward(hi, epsilon)) <= abs(responder_reward(lo, epsilon)) else lo
    return UltimatumSolution(float(epsilon), s, responder_reward(s, epsilon))


def calibrate_epsilon(observed_threshold: float) -> float:
    """Envy level whose acceptance threshold is ``observed_threshold``."""
    s = observed_threshold
    if not 0 < s < FAIR_SHARE:
        raise ValueError(f"threshold must lie in (0, 1/2), got {s!r}")
    return -s / math.log(s / FAIR_SHARE)


def threshold_curve(epsilons: Iterable[float] = DEFAULT_GRID) -> List[UltimatumSolution]:
    return [acceptance_threshold(float(e)) for e in epsilons]


def proposer_offer(epsilon: float, margin: float = 0.0) -> float:
    """Offer of a profit-maximizing proposer: the responder's threshold plus
    a safety ``margin``, capped at the fair share."""
    return min(acceptance_threshold(epsilon).threshold + margin, FAIR_SHARE)

"""Greedy minimum-entropy coupling of two distributions."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .dist import _check_distribution, _xlogx_sum


@dataclass(frozen=True)
class Coupling:
    joint: np.ndarray
    entropy: float


def greedy_coupling(mu, nu) -> Coupling:
    """Approximate minimum-entropy coupling of ``mu`` and ``nu``.

    Repeatedly pairs the largest remaining mass of each marginal, assigns the
    smaller of the two to that cell and pushes the remainder back. Runs in
    O(k log k) for k = max(len(mu), len(nu)).

    Examples
    --------
    >>> c = greedy_coupling([0.5, 0.25, 0.25], [0.5, 0.5])
    >>> c.entropy
    1.5
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    _check_distribution(mu, "mu")
    _check_distribution(nu, "nu")
    joint = np.zeros((mu.size, nu.size))
    # max-heaps via negated masses; index breaks ties deterministically
    hm = [(-m, i) for i, m in enumerate(mu) if m > 0]
    hn = [(-m, j) for j, m in enumerate(nu) if m > 0]
    heapq.heapify(hm)
    heapq.heapify(hn)
    while hm and hn:
        a, i = heapq.heappop(hm)
        b, j = heapq.heappop(hn)
        a, b = -a, -b
        m = min(a, b)
        joint[i, j] += m
        # m equals a or b exactly, so each round exhausts at least one entry
        if a - m > 0:
            heapq.heappush(hm, (-(a - m), i))
        if b - m > 0:
            heapq.heappush(hn, (-(b - m), j))
    return Coupling(joint, _xlogx_sum(joint))

"""Candidate pruning and per-variate assignment after detection.

Detection yields candidate changepoints with provisional affected sets.
Here each variate independently solves an optimal-partitioning problem
restricted to the candidate positions, paying ``alpha`` per kept change.
A variate is assigned to exactly the candidates on its optimal path;
candidates that no variate selects are dropped.  Sparse/dense labels from
detection are kept for reporting.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import Detection, SegmentationResult
from .costs import CostModel


def optimal_partition(
    model: CostModel,
    i: int,
    taus: Sequence[int],
    alpha: float,
    prune: bool = False,
) -> tuple[tuple[int, ...], float]:
    """Best subset of candidate splits for variate ``i``.

    Minimizes the total segment cost plus ``alpha`` per segment over all
    subsets of ``taus`` (strictly increasing, within 1..n-1).  Returns the
    selected tau values and the objective.  ``prune`` enables inequality
    pruning of dominated predecessors; it never changes the optimum because
    splitting a segment at a candidate cannot increase its cost.
    """
    taus = list(taus)
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError(f"candidates must be strictly increasing, got {taus}")
    if taus and not (1 <= taus[0] and taus[-1] <= model.n - 1):
        raise ValueError(f"candidates {taus} outside 1..{model.n - 1}")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    q = len(taus)
    if q == 0:
        return (), model.segment_cost(i, 1, model.n) + alpha

    bounds = np.array([0, *taus, model.n])
    cost = model.boundary_cost_matrix(i, bounds)

    # f[j]: best cost of 1..bounds[j] with alpha per segment, less one alpha
    # so that the first segment is not charged twice.
    f = np.empty(q + 2)
    f[0] = -alpha
    back = np.zeros(q + 2, dtype=int)
    admissible = [0]
    for j in range(1, q + 2):
        ks = np.array(admissible) if prune else np.arange(j)
        totals = f[ks] + cost[ks, j] + alpha
        pick = int(np.argmin(totals))
        f[j] = totals[pick]
        back[j] = ks[pick]
        if prune:
            admissible = [k for k, tot in zip(ks, f[ks] + cost[ks, j]) if tot <= f[j]]
            admissible.append(j)

    selected: list[int] = []
    j = q + 1
    while j > 0:
        k = back[j]
        if k > 0:
            selected.append(taus[k - 1])
        j = k
    selected.reverse()
    return tuple(selected), float(f[q + 1] + alpha)


def postprocess(
    model: CostModel,
    result: SegmentationResult,
    alpha: float | None = None,
    prune: bool = False,
) -> SegmentationResult:
    """Re-derive affected sets by per-variate partitioning; drop orphans.

    Applies to every candidate regardless of its detection label.  With no
    candidates the result is returned unchanged.
    """
    if not result.detections:
        return result
    if alpha is None:
        alpha = result.penalties.alpha
    taus = [det.tau for det in result.detections]
    membership: dict[int, set[int]] = {tau: set() for tau in taus}
    for i in range(1, model.d + 1):
        selected, _ = optimal_partition(model, i, taus, alpha, prune=prune)
        for tau in selected:
            membership[tau].add(i)
    kept = [
        Detection(
            tau=det.tau,
            kind=det.kind,
            affected=frozenset(membership[det.tau]),
            statistic=det.statistic,
            interval=det.interval,
        )
        for det in result.detections
        if membership[det.tau]
    ]
    return SegmentationResult(
        detections=tuple(kept),
        penalties=result.penalties,
        model=result.model,
        n=result.n,
        d=result.d,
        seed=result.seed,
        n_intervals=result.n_intervals,
    )

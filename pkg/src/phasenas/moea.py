"""NSGA-II ranking and selection for minimization problems."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(a <= b) and np.any(a < b))


def _as_points(points) -> np.ndarray:
    if hasattr(points, "__len__") and len(points) and hasattr(points[0], "as_tuple"):
        points = [p.as_tuple() for p in points]
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected an (N, M) array of objectives, got shape {arr.shape}")
    return arr


def fast_nondominated_sort(points) -> list[list[int]]:
    """Partition indices into fronts; front 0 is the non-dominated set.

    Indices inside a front are in ascending order.
    """
    f = _as_points(points)
    n = len(f)
    if n == 0:
        return []
    le = np.all(f[:, None, :] <= f[None, :, :], axis=2)
    lt = np.any(f[:, None, :] < f[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    counts = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current.tolist())
        counts = counts - dom[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def crowding_distance(front) -> np.ndarray:
    """Crowding distance of each point in a single front.

    Boundary points per objective get ``inf``; an objective with zero range
    adds nothing. Fronts of one or two points are all boundary.
    """
    f = _as_points(front)
    n, m = f.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(f[:, j], kind="stable")
        col = f[order, j]
        span = col[-1] - col[0]
        if span == 0:
            continue
        dist[order[0]] = dist[order[-1]] = np.inf
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def rank_and_crowding(points) -> tuple[np.ndarray, np.ndarray]:
    f = _as_points(points)
    rank = np.zeros(len(f), dtype=int)
    crowd = np.zeros(len(f))
    for r, front in enumerate(fast_nondominated_sort(f)):
        rank[front] = r
        crowd[front] = crowding_distance(f[front])
    return rank, crowd


@dataclass
class RankedIndividual:
    genome: Any
    objectives: Any
    rank: int = 0
    crowding: float = 0.0


def rank_population(genomes: Sequence, objectives: Sequence) -> list[RankedIndividual]:
    rank, crowd = rank_and_crowding(objectives)
    return [RankedIndividual(g, o, int(r), float(c))
            for g, o, r, c in zip(genomes, objectives, rank, crowd)]


def crowded_better(a: RankedIndividual, b: RankedIndividual) -> int:
    """-1 if ``a`` wins, 1 if ``b`` wins, 0 on a full tie."""
    if a.rank != b.rank:
        return -1 if a.rank < b.rank else 1
    if a.crowding != b.crowding:
        return -1 if a.crowding > b.crowding else 1
    return 0


def tournament_select(pop: Sequence[RankedIndividual], rng: np.random.Generator) -> int:
    """Binary tournament under the crowded comparison; returns an index into ``pop``."""
    if not pop:
        raise ValueError("empty population")
    if len(pop) == 1:
        return 0
    i, j = rng.choice(len(pop), size=2, replace=False)
    c = crowded_better(pop[i], pop[j])
    if c == 0:
        return int(i if rng.random() < 0.5 else j)
    return int(i if c < 0 else j)


def environmental_selection(points, n: int) -> list[int]:
    """Indices of the ``n`` survivors, whole fronts first, then by crowding."""
    f = _as_points(points)
    if n > len(f):
        raise ValueError(f"cannot select {n} survivors from {len(f)} candidates")
    survivors: list[int] = []
    for front in fast_nondominated_sort(f):
        room = n - len(survivors)
        if room <= 0:
            break
        if len(front) <= room:
            survivors.extend(front)
            continue
        crowd = crowding_distance(f[front])
        # stable sort keeps input order among equal crowding
        order = np.argsort(-crowd, kind="stable")
        survivors.extend(front[k] for k in order[:room])
    return survivors


def nondominated_indices(points) -> list[int]:
    f = _as_points(points)
    if len(f) == 0:
        return []
    return fast_nondominated_sort(f)[0]

"""Hypervolume and offspring-survival instrumentation for two objectives."""
from __future__ import annotations

from typing import Hashable, Iterable, Sequence

import numpy as np

NORMALIZED_REF_OFFSET = 0.01


def _points(points) -> np.ndarray:
    pts = [p.as_tuple() if hasattr(p, "as_tuple") else tuple(p) for p in points]
    if not pts:
        return np.empty((0, 2))
    arr = np.asarray(pts, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected 2-objective points, got shape {arr.shape}")
    return arr


def hypervolume_2d(points, ref: Sequence[float]) -> float:
    """Exact area dominated by ``points`` and bounded by ``ref`` (both minimized).

    Points not strictly better than ``ref`` in both objectives are ignored.
    """
    ref = np.asarray(ref, dtype=float)
    pts = _points(points)
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    # sort by f1 then f2; sweeping keeps only points that lower the f2 staircase
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    area = 0.0
    best_f2 = ref[1]
    for f1, f2 in pts:
        if f2 < best_f2:
            area += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(area)


def objective_bounds(points) -> tuple[np.ndarray, np.ndarray]:
    pts = _points(points)
    if len(pts) == 0:
        raise ValueError("bounds need at least one point")
    return pts.min(axis=0), pts.max(axis=0)


def normalize(points, bounds: tuple[Sequence[float], Sequence[float]]) -> np.ndarray:
    """Affine map of each objective onto [0, 1]; zero-range objectives map to 0."""
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    pts = _points(points)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = (pts - lo) / safe
    out[:, span <= 0] = 0.0
    return out


def normalized_hv(front, bounds, eps: float = NORMALIZED_REF_OFFSET) -> float:
    """Hypervolume in archive-normalized space against ``(1 + eps, 1 + eps)``."""
    return hypervolume_2d(normalize(front, bounds), (1.0 + eps, 1.0 + eps))


def reference_point(bounds, eps: float = NORMALIZED_REF_OFFSET) -> np.ndarray:
    """The normalized reference point mapped back to raw objective units."""
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    return lo + (1.0 + eps) * (hi - lo)


def survival_rate(offspring: Iterable[Hashable], survivors: Iterable[Hashable]) -> float | None:
    """Fraction of offspring kept by selection; ``None`` when there were none."""
    offspring = list(offspring)
    if not offspring:
        return None
    kept = set(survivors)
    return sum(1 for o in offspring if o in kept) / len(offspring)

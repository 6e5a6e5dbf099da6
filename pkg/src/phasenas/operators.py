"""Homogeneous crossover and single-bit-capped mutation."""
from __future__ import annotations

import numpy as np

from .encoding import ConfigMismatchError, NetworkGenome


def _recombine(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    child = a.copy()
    diff = np.flatnonzero(a != b)
    if diff.size == 0:
        return child
    k1 = int(a[diff].sum())
    k2 = diff.size - k1
    t = int(rng.integers(min(k1, k2), max(k1, k2) + 1))
    child[diff] = 0
    child[rng.choice(diff, size=t, replace=False)] = 1
    return child


def crossover(p1: NetworkGenome, p2: NetworkGenome, rng: np.random.Generator,
              p_c: float = 0.9, per_phase: bool = False) -> NetworkGenome:
    """Keep the parents' common bits, re-deal the rest.

    With probability ``1 - p_c`` the child is a copy of a random parent.
    Otherwise the number of ones placed among the disagreeing positions is
    drawn uniformly between the two parents' counts there, so the child's
    total ones lie between the parents'. ``per_phase`` applies the bound to
    each phase separately.
    """
    if p1.n_p != p2.n_p or p1.n_o != p2.n_o:
        raise ConfigMismatchError("parents were built for different encodings")
    if rng.random() >= p_c:
        return p1 if rng.random() < 0.5 else p2
    a, b = p1.to_array(), p2.to_array()
    if per_phase:
        step = len(a) // p1.n_p
        child = np.concatenate([_recombine(a[i:i + step], b[i:i + step], rng)
                                for i in range(0, len(a), step)])
    else:
        child = _recombine(a, b, rng)
    return NetworkGenome.from_array(child, p1.n_p)


def mutate(g: NetworkGenome, rng: np.random.Generator, p_m: float = 0.02) -> NetworkGenome:
    """Flip at most one bit.

    Bits are visited in a random order, each getting a Bernoulli(``p_m``)
    trial; the first success is flipped and the scan stops.
    """
    if not 0.0 <= p_m <= 1.0:
        raise ValueError(f"p_m must lie in [0, 1], got {p_m}")
    bits = g.to_array()
    order = rng.permutation(len(bits))
    hits = np.flatnonzero(rng.random(len(bits)) < p_m)
    if hits.size == 0:
        return g
    pos = order[hits[0]]
    bits[pos] ^= 1
    return NetworkGenome.from_array(bits, g.n_p)

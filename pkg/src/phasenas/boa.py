"""Chain Bayesian network over canonical phases, fitted to the search history.

The model is ``p(x1) p(x2 | x1) ... p(xn | xn-1)`` where each ``xi`` is the
canonical key of phase ``i``. Tables are frequency counts over every
archived genome, smoothed with a pseudo-count ``alpha`` spread over the keys
actually observed at that position (never the full bit-string space).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dedup import CanonicalPhaseKey, canonical_phase, key_digest
from .encoding import NetworkGenome, PhaseGenome, format_phase
from .moea import fast_nondominated_sort


@dataclass(frozen=True)
class Table:
    keys: tuple[CanonicalPhaseKey, ...]
    probs: np.ndarray

    def as_dict(self) -> dict[CanonicalPhaseKey, float]:
        return dict(zip(self.keys, self.probs.tolist()))


@dataclass(frozen=True)
class PhaseBayesNet:
    marginals: tuple[Table, ...]  # one per phase position; [0] is the root
    conditionals: tuple[dict[CanonicalPhaseKey, Table], ...]  # [i]: p(x_{i+1} | x_i)
    support: tuple[tuple[CanonicalPhaseKey, ...], ...]
    representatives: dict[CanonicalPhaseKey, PhaseGenome]
    alpha: float

    @property
    def n_p(self) -> int:
        return len(self.marginals)

    @property
    def marginal(self) -> Table:
        return self.marginals[0]


def _genomes(archive) -> list[NetworkGenome]:
    if hasattr(archive, "genomes"):
        return list(archive.genomes())
    return list(archive)


def _normalized(keys: list[CanonicalPhaseKey], counts: dict, alpha: float) -> Table:
    raw = np.array([counts.get(k, 0) + alpha for k in keys], dtype=float)
    total = raw.sum()
    if total <= 0:
        raise ValueError("cannot normalize an all-zero table")
    return Table(tuple(keys), raw / total)


def fit_bn(archive, alpha: float = 1.0) -> PhaseBayesNet:
    """Fit the chain model to every genome in ``archive`` (genomes or a SearchArchive)."""
    genomes = _genomes(archive)
    if not genomes:
        raise ValueError("cannot fit a model to an empty archive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    n_p = genomes[0].n_p
    reps: dict[CanonicalPhaseKey, PhaseGenome] = {}
    support: list[dict[CanonicalPhaseKey, None]] = [{} for _ in range(n_p)]
    counts: list[dict[CanonicalPhaseKey, int]] = [{} for _ in range(n_p)]
    trans: list[dict[CanonicalPhaseKey, dict[CanonicalPhaseKey, int]]] = [
        {} for _ in range(n_p - 1)]
    for g in genomes:
        if g.n_p != n_p:
            raise ValueError("archive mixes genomes with different phase counts")
        keys = [canonical_phase(p) for p in g.phases]
        for i, (k, p) in enumerate(zip(keys, g.phases)):
            reps.setdefault(k, p)
            support[i].setdefault(k)
            counts[i][k] = counts[i].get(k, 0) + 1
        for i in range(n_p - 1):
            row = trans[i].setdefault(keys[i], {})
            row[keys[i + 1]] = row.get(keys[i + 1], 0) + 1

    supp = tuple(tuple(s) for s in support)
    marginals = tuple(_normalized(list(supp[i]), counts[i], alpha) for i in range(n_p))
    conditionals = tuple(
        {prev: _normalized(list(supp[i + 1]), row, alpha) for prev, row in trans[i].items()}
        for i in range(n_p - 1))
    return PhaseBayesNet(marginals, conditionals, supp, reps, alpha)


def _draw(table: Table, rng: np.random.Generator) -> CanonicalPhaseKey:
    return table.keys[int(rng.choice(len(table.keys), p=table.probs))]


def sample_keys(bn: PhaseBayesNet, rng: np.random.Generator) -> list[CanonicalPhaseKey]:
    keys = [_draw(bn.marginals[0], rng)]
    for i in range(1, bn.n_p):
        table = bn.conditionals[i - 1].get(keys[-1], bn.marginals[i])
        keys.append(_draw(table, rng))
    return keys


def sample_bn(bn: PhaseBayesNet, rng: np.random.Generator, count: int) -> list[NetworkGenome]:
    """Draw ``count`` genomes by walking the chain and materializing each key."""
    return [NetworkGenome(tuple(bn.representatives[k] for k in sample_keys(bn, rng)))
            for _ in range(count)]


def bn_document(bn: PhaseBayesNet) -> dict:
    def table(t: Table) -> dict:
        return {key_digest(k): round(p, 12) for k, p in zip(t.keys, t.probs.tolist())}

    return {
        "alpha": bn.alpha,
        "representatives": {key_digest(k): format_phase(p)
                            for k, p in bn.representatives.items()},
        "marginals": [table(t) for t in bn.marginals],
        "conditionals": [{key_digest(prev): table(t) for prev, t in cond.items()}
                         for cond in bn.conditionals],
    }


def dump_bn(bn: PhaseBayesNet) -> str:
    return json.dumps(bn_document(bn), indent=1, sort_keys=True)


def restrict_to_fronts(genomes: Iterable[NetworkGenome], objectives, k: int) -> list[NetworkGenome]:
    """Genomes in the first ``k`` non-dominated fronts of ``objectives``."""
    genomes = list(genomes)
    keep: list[int] = []
    for front in fast_nondominated_sort(objectives)[:k]:
        keep.extend(front)
    return [genomes[i] for i in sorted(keep)]

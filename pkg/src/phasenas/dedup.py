"""Duplicate detection by canonical relabelling of decoded phases.

Each phase is turned into a signed connectivity matrix with a virtual input
row first and a virtual output row last. The canonical key is the
lexicographically smallest serialization of that matrix over every
simultaneous row/column permutation of the active-node block; the virtual
rows stay in place. Enumeration is exact, so it is guarded to small phases.
"""
from __future__ import annotations

import hashlib
import itertools
from functools import lru_cache

import numpy as np

from .encoding import ConfigMismatchError, NetworkGenome, PhaseGenome, decode_phase, phase_length

MAX_CANONICAL_NODES = 8
MAX_CENSUS_NODES = 6

CanonicalPhaseKey = bytes
NetworkKey = tuple[bytes, ...]


def connectivity_matrix(p: PhaseGenome) -> tuple[np.ndarray, bool]:
    """Signed matrix of shape (n_o+2, n_o+2) and the skip flag.

    Index 0 is the phase input, 1..n_o the node slots, n_o+1 the phase output.
    ``m[i, j] = +1`` when ``i`` takes an input from ``j``; ``m[j, i] = -1``.
    """
    g = decode_phase(p)
    n = g.n_o
    out = n + 1
    m = np.zeros((n + 2, n + 2), dtype=np.int8)
    for s, d in g.edges:
        m[d, s], m[s, d] = 1, -1
    for v in g.input_attached:
        m[v, 0], m[0, v] = 1, -1
    for v in g.output_attached:
        m[out, v], m[v, out] = 1, -1
    return m, g.skip


@lru_cache(maxsize=None)
def _permutations(k: int) -> np.ndarray:
    """Index arrays that permute the node block and keep the virtual rows fixed."""
    if k == 0:
        return np.array([[0, 1]], dtype=np.intp)
    perms = np.array(list(itertools.permutations(range(1, k + 1))), dtype=np.intp)
    first = np.zeros((len(perms), 1), dtype=np.intp)
    last = np.full((len(perms), 1), k + 1, dtype=np.intp)
    return np.hstack([first, perms, last])


@lru_cache(maxsize=None)
def _lower_triangle(size: int) -> tuple[np.ndarray, np.ndarray]:
    return np.tril_indices(size, k=-1)


@lru_cache(maxsize=None)
def _canonical_bits(bits: tuple[int, ...]) -> bytes:
    p = PhaseGenome(bits)
    m, skip = connectivity_matrix(p)
    n = p.n_o
    active = [v for v in range(1, n + 1) if m[v].any()]
    idx = [0, *active, n + 1]
    sub = m[np.ix_(idx, idx)]
    perms = _permutations(len(active))
    # antisymmetric: the strict lower triangle determines the matrix
    rows, cols = _lower_triangle(len(idx))
    tri = (sub[perms[:, rows], perms[:, cols]] + 1).astype(np.uint8)
    if tri.shape[1] <= 39:
        # base-3 packing preserves lexicographic order and fits in int64
        weights = 3 ** np.arange(tri.shape[1] - 1, -1, -1, dtype=np.int64)
        best = int(np.argmin(tri.astype(np.int64) @ weights))
    else:
        # lexsort keys run last-to-first, so feed columns reversed
        best = int(np.lexsort(tri.T[::-1])[0])
    return bytes([len(active), int(skip)]) + tri[best].tobytes()


def canonical_phase(p: PhaseGenome) -> CanonicalPhaseKey:
    """Relabelling-invariant key; equal keys iff the decoded phases are isomorphic."""
    if p.n_o > MAX_CANONICAL_NODES:
        raise NotImplementedError(
            f"exact canonicalization supports n_o <= {MAX_CANONICAL_NODES}, got {p.n_o}")
    return _canonical_bits(p.bits)


def canonical_network(g: NetworkGenome) -> NetworkKey:
    return tuple(canonical_phase(p) for p in g.phases)


def key_digest(key: NetworkKey | CanonicalPhaseKey, length: int = 16) -> str:
    if isinstance(key, bytes):
        key = (key,)
    h = hashlib.sha256()
    for part in key:
        h.update(len(part).to_bytes(2, "big"))
        h.update(part)
    return h.hexdigest()[:length]


def is_duplicate(a: NetworkGenome, b: NetworkGenome) -> bool:
    """Phase-by-phase, order-preserving phenotype equality."""
    if a.n_p != b.n_p or a.n_o != b.n_o:
        raise ConfigMismatchError(
            f"cannot compare n_p={a.n_p}/n_o={a.n_o} with n_p={b.n_p}/n_o={b.n_o}")
    return canonical_network(a) == canonical_network(b)


def redundancy_census(n_o: int) -> tuple[int, int]:
    """(total phase strings, distinct phenotypes) for ``n_o`` nodes."""
    if not 2 <= n_o <= MAX_CENSUS_NODES:
        raise NotImplementedError(f"census supports 2 <= n_o <= {MAX_CENSUS_NODES}, got {n_o}")
    length = phase_length(n_o)
    total = 2 ** length
    keys = set()
    # the skip bit is carried verbatim in the key, so it doubles the classes
    for code in range(2 ** (length - 1)):
        bits = tuple((code >> (length - 2 - i)) & 1 for i in range(length - 1)) + (0,)
        keys.add(canonical_phase(PhaseGenome(bits)))
    return total, 2 * len(keys)

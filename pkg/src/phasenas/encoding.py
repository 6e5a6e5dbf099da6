"""Phase-wise binary genotype: representation, text format, decoding.

A phase with ``n_o`` nodes is a bit string of length ``n_o*(n_o-1)/2 + 1``.
Node ``i`` (2..n_o) owns a group of ``i-1`` bits whose ``j``-th bit connects
node ``j`` to node ``i``; the last bit routes the phase input straight to the
phase output. A genome is ``n_p`` such phases, one per resolution stage.

Text form groups bits by node with dashes and separates phases by a single
space, e.g. ``"1-01-001-0001-00001-1 0-00-000-0000-00000-1 ..."``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NODE_OPERATION = "conv3x3-bn-relu"
KERNEL_SIZE = 3


class GenomeParseError(ValueError):
    """Malformed genome text. ``position`` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ConfigMismatchError(ValueError):
    """Genomes or architectures built for different encoding configurations."""


def phase_length(n_o: int) -> int:
    return n_o * (n_o - 1) // 2 + 1


def nodes_for_length(length: int) -> int:
    # inverse of phase_length; raises for lengths that are not n(n-1)/2 + 1
    n = int(round((1 + math.sqrt(1 + 8 * (length - 1))) / 2))
    if n < 2 or phase_length(n) != length:
        raise ValueError(f"{length} is not a valid phase length")
    return n


@dataclass(frozen=True)
class EncodingConfig:
    n_p: int = 3
    n_o: int = 6
    resolution_schedule: tuple[int, ...] | None = None
    channel_width: int = 16
    input_channels: int = 3
    input_resolution: int = 32

    def __post_init__(self):
        if self.n_p < 1:
            raise ValueError(f"n_p must be >= 1, got {self.n_p}")
        if self.n_o < 2:
            raise ValueError(f"n_o must be >= 2, got {self.n_o}")
        if self.channel_width < 1 or self.input_channels < 1 or self.input_resolution < 1:
            raise ValueError("channel widths and input resolution must be positive")
        if self.resolution_schedule is None:
            # stride-2 pooling after every phase but the last
            sched = tuple(max(1, self.input_resolution >> i) for i in range(self.n_p))
        else:
            sched = tuple(int(r) for r in self.resolution_schedule)
        if len(sched) != self.n_p:
            raise ValueError(
                f"resolution_schedule needs {self.n_p} entries, got {len(sched)}")
        if any(r < 1 for r in sched):
            raise ValueError("resolutions must be positive")
        if any(b > a for a, b in zip(sched, sched[1:])):
            raise ValueError(f"resolution_schedule must be non-increasing: {sched}")
        object.__setattr__(self, "resolution_schedule", sched)

    @property
    def phase_bits(self) -> int:
        return phase_length(self.n_o)

    @property
    def genome_bits(self) -> int:
        return self.n_p * self.phase_bits


@dataclass(frozen=True)
class PhaseGenome:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("phase bits must be 0 or 1")
        nodes_for_length(len(bits))
        object.__setattr__(self, "bits", bits)

    @property
    def n_o(self) -> int:
        return nodes_for_length(len(self.bits))

    @property
    def skip(self) -> bool:
        return bool(self.bits[-1])

    def connection(self, src: int, dst: int) -> int:
        """Bit controlling the edge ``src -> dst`` (1-based nodes, src < dst)."""
        return self.bits[(dst - 1) * (dst - 2) // 2 + (src - 1)]

    def __str__(self) -> str:
        return format_phase(self)


@dataclass(frozen=True)
class NetworkGenome:
    phases: tuple[PhaseGenome, ...]

    def __post_init__(self):
        phases = tuple(self.phases)
        if not phases:
            raise ValueError("genome needs at least one phase")
        if len({len(p.bits) for p in phases}) != 1:
            raise ValueError("all phases must have the same bit length")
        object.__setattr__(self, "phases", phases)

    @property
    def n_p(self) -> int:
        return len(self.phases)

    @property
    def n_o(self) -> int:
        return self.phases[0].n_o

    def to_array(self) -> np.ndarray:
        return np.array([b for p in self.phases for b in p.bits], dtype=np.int8)

    @classmethod
    def from_array(cls, bits: Sequence[int], n_p: int) -> "NetworkGenome":
        bits = [int(b) for b in bits]
        if n_p < 1 or len(bits) % n_p:
            raise ValueError(f"{len(bits)} bits cannot be split into {n_p} phases")
        step = len(bits) // n_p
        return cls(tuple(PhaseGenome(tuple(bits[i:i + step]))
                         for i in range(0, len(bits), step)))

    def matches(self, cfg: EncodingConfig) -> bool:
        return self.n_p == cfg.n_p and self.n_o == cfg.n_o

    def __str__(self) -> str:
        return format_genome(self)


@dataclass(frozen=True)
class PhaseGraph:
    """Decoded phase. Nodes are 1-based ids into the phase's node slots."""

    n_o: int
    active_nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    input_attached: frozenset[int]
    output_attached: frozenset[int]
    skip: bool

    @property
    def is_empty(self) -> bool:
        return not self.active_nodes

    @property
    def connections(self) -> int:
        return len(self.edges) + len(self.input_attached) + len(self.output_attached)

    def predecessors(self, node: int) -> list[int]:
        return sorted(s for s, d in self.edges if d == node)


@dataclass(frozen=True)
class NetworkArchitecture:
    phase_graphs: tuple[PhaseGraph, ...]
    resolutions: tuple[int, ...]
    channel_width: int
    input_channels: int
    operation: str = NODE_OPERATION
    kernel_size: int = KERNEL_SIZE

    def __post_init__(self):
        if len(self.phase_graphs) != len(self.resolutions):
            raise ValueError("one resolution per phase required")


# -- text format -----------------------------------------------------------

def format_phase(p: PhaseGenome) -> str:
    groups = []
    pos = 0
    for node in range(2, p.n_o + 1):
        groups.append("".join(map(str, p.bits[pos:pos + node - 1])))
        pos += node - 1
    groups.append(str(p.bits[-1]))
    return "-".join(groups)


def format_genome(g: NetworkGenome) -> str:
    return " ".join(format_phase(p) for p in g.phases)


def parse_phase(text: str, n_o: int, offset: int = 0) -> PhaseGenome:
    groups = text.split("-")
    if len(groups) != n_o:
        what = "missing" if len(groups) < n_o else "extra"
        raise GenomeParseError(
            f"phase {text!r} has {len(groups)} groups, expected {n_o} "
            f"({what} group{'s' if abs(len(groups) - n_o) > 1 else ''}; "
            "the last group is the skip bit)", offset + len(text))
    bits: list[int] = []
    pos = offset
    for k, grp in enumerate(groups):
        want = k + 1 if k < n_o - 1 else 1
        if len(grp) != want:
            raise GenomeParseError(
                f"group {k + 1} {grp!r} has {len(grp)} bits, expected {want}", pos)
        bits.extend(int(c) for c in grp)
        pos += len(grp) + 1
    return PhaseGenome(tuple(bits))


def parse_genome(text: str, cfg: EncodingConfig) -> NetworkGenome:
    """Parse the dash/space text form; errors carry the offending offset."""
    for i, c in enumerate(text):
        if c not in "01- ":
            raise GenomeParseError(f"illegal character {c!r}", i)
    if not text or text[0] == " " or text[-1] == " ":
        raise GenomeParseError("leading/trailing space or empty genome",
                               0 if not text or text[0] == " " else len(text) - 1)
    if "  " in text:
        raise GenomeParseError("phases must be separated by a single space",
                               text.index("  "))
    chunks = text.split(" ")
    if len(chunks) != cfg.n_p:
        raise GenomeParseError(
            f"expected {cfg.n_p} phases, found {len(chunks)}", len(text))
    phases = []
    offset = 0
    for chunk in chunks:
        phases.append(parse_phase(chunk, cfg.n_o, offset))
        offset += len(chunk) + 1
    return NetworkGenome(tuple(phases))


# -- decoding --------------------------------------------------------------

def decode_phase(p: PhaseGenome) -> PhaseGraph:
    n = p.n_o
    raw = {(s, d) for d in range(2, n + 1) for s in range(1, d) if p.connection(s, d)}
    has_in = {d for _, d in raw}
    has_out = {s for s, _ in raw}
    # a node touched by no connection bit at all is dropped
    active = has_in | has_out
    return PhaseGraph(
        n_o=n,
        active_nodes=frozenset(active),
        edges=frozenset(raw),
        input_attached=frozenset(active - has_in),
        output_attached=frozenset(active - has_out),
        skip=p.skip,
    )


def decode_network(g: NetworkGenome, cfg: EncodingConfig) -> NetworkArchitecture:
    if not g.matches(cfg):
        raise ConfigMismatchError(
            f"genome has n_p={g.n_p}, n_o={g.n_o}; config has n_p={cfg.n_p}, n_o={cfg.n_o}")
    return NetworkArchitecture(
        phase_graphs=tuple(decode_phase(p) for p in g.phases),
        resolutions=cfg.resolution_schedule,
        channel_width=cfg.channel_width,
        input_channels=cfg.input_channels,
    )


def encode_phase(edges: Iterable[tuple[int, int]], n_o: int, skip: bool) -> PhaseGenome:
    """Inverse of decoding for edge sets that respect node order."""
    bits = [0] * phase_length(n_o)
    for s, d in edges:
        if not 1 <= s < d <= n_o:
            raise ValueError(f"edge {s}->{d} does not respect node order")
        bits[(d - 1) * (d - 2) // 2 + (s - 1)] = 1
    bits[-1] = int(bool(skip))
    return PhaseGenome(tuple(bits))


# -- sampling and accounting ----------------------------------------------

def random_genome(rng: np.random.Generator, cfg: EncodingConfig) -> NetworkGenome:
    bits = rng.integers(0, 2, size=cfg.genome_bits)
    return NetworkGenome.from_array(bits, cfg.n_p)


def search_space_size(n_p: int, n_o: int) -> int:
    """``n_p * 2**(n_o(n_o-1)/2 + 1)``, the count quoted for the encoding."""
    if n_p < 1 or n_o < 1:
        raise ValueError("n_p and n_o must be >= 1")
    return n_p * 2 ** phase_length(n_o)


def genotype_configurations(n_p: int, n_o: int) -> int:
    """Number of distinct joint bit strings, ``2**(n_p * phase_length)``."""
    if n_p < 1 or n_o < 1:
        raise ValueError("n_p and n_o must be >= 1")
    return 2 ** (n_p * phase_length(n_o))


def max_phase_connections(n_o: int) -> int:
    # fully connected DAG: every pair wired, one input and one output attachment
    return n_o * (n_o - 1) // 2 + 2


# -- export ----------------------------------------------------------------

def architecture_document(a: NetworkArchitecture) -> dict:
    phases = []
    for i, (pg, res) in enumerate(zip(a.phase_graphs, a.resolutions)):
        phases.append({
            "index": i + 1,
            "resolution": res,
            "channels": a.channel_width,
            "nodes": sorted(pg.active_nodes),
            "edges": sorted([s, d] for s, d in pg.edges),
            "input_attached": sorted(pg.input_attached),
            "output_attached": sorted(pg.output_attached),
            "skip": pg.skip,
            "pass_through": pg.is_empty,
        })
    return {
        "operation": a.operation,
        "kernel_size": a.kernel_size,
        "input_channels": a.input_channels,
        "channel_width": a.channel_width,
        "phases": phases,
    }


def architecture_json(a: NetworkArchitecture) -> str:
    return json.dumps(architecture_document(a), sort_keys=True, separators=(",", ":"))


def to_dot(a: NetworkArchitecture, name: str = "network") -> str:
    lines = [f'digraph "{name}" {{', "  rankdir=LR;", "  node [shape=box];"]
    prev_out = "input"
    lines.append('  input [label="input", shape=ellipse];')
    for i, (pg, res) in enumerate(zip(a.phase_graphs, a.resolutions), start=1):
        pin, pout = f"p{i}_in", f"p{i}_out"
        lines.append(f"  subgraph cluster_p{i} {{")
        lines.append(f'    label="phase {i} ({res}x{res}, {a.channel_width}ch)";')
        lines.append(f'    {pin} [label="in", shape=point];')
        lines.append(f'    {pout} [label="sum", shape=circle];')
        for n in sorted(pg.active_nodes):
            lines.append(f'    p{i}_n{n} [label="{n}: {a.operation}"];')
        for n in sorted(pg.input_attached):
            lines.append(f"    {pin} -> p{i}_n{n};")
        for s, d in sorted(pg.edges):
            lines.append(f"    p{i}_n{s} -> p{i}_n{d};")
        for n in sorted(pg.output_attached):
            lines.append(f"    p{i}_n{n} -> {pout};")
        if pg.skip or pg.is_empty:
            style = "dashed" if pg.skip else "dotted"
            lines.append(f"    {pin} -> {pout} [style={style}];")
        lines.append("  }")
        lines.append(f"  {prev_out} -> {pin};")
        prev_out = pout
    lines.append('  output [label="global-avg-pool", shape=ellipse];')
    lines.append(f"  {prev_out} -> output;")
    lines.append("}")
    return "\n".join(lines) + "\n"

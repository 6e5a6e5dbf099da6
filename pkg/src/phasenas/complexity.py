"""Analytic cost of a decoded architecture: parameters and multiply-adds."""
from __future__ import annotations

from dataclasses import dataclass

from .encoding import NetworkArchitecture


@dataclass(frozen=True)
class ComplexityReport:
    params: int
    flops: int  # multiply-adds
    active_nodes: int
    active_connections: int


def count_structure(a: NetworkArchitecture) -> tuple[int, int]:
    """Total active nodes and connections (edges + input/output attachments)."""
    nodes = sum(len(pg.active_nodes) for pg in a.phase_graphs)
    conns = sum(pg.connections for pg in a.phase_graphs)
    return nodes, conns


def estimate_complexity(a: NetworkArchitecture) -> ComplexityReport:
    """Sum conv + batch-norm parameters and conv multiply-adds over active nodes.

    Each node is a ``k x k`` convolution producing ``channel_width`` maps at
    its phase's resolution. Nodes fed by the network input (input-attached
    nodes of the first phase) see ``input_channels``; every other node reads
    a sum of ``channel_width``-wide tensors. Joins, pooling and the
    rectifier are free.
    """
    k2 = a.kernel_size ** 2
    c_out = a.channel_width
    params = flops = 0
    for i, (pg, res) in enumerate(zip(a.phase_graphs, a.resolutions)):
        for node in pg.active_nodes:
            c_in = a.input_channels if i == 0 and node in pg.input_attached else c_out
            conv = k2 * c_in * c_out
            params += conv + 2 * c_out
            flops += conv * res * res
    nodes, conns = count_structure(a)
    return ComplexityReport(params=params, flops=flops, active_nodes=nodes,
                            active_connections=conns)

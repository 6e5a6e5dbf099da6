"""
Counting parameters and FLOPs
=============================

Every active node is a 3x3 convolution with batch norm. Its input width
is the phase width, except for nodes fed by the raw image in the first
phase.
"""

from phasenas import EncodingConfig, decode_network, estimate_complexity, parse_genome

cfg = EncodingConfig()
phases = {
    "empty": "0-00-000-0000-00000-0",
    "two nodes": "1-00-000-0000-00000-0",
    "chain": "1-01-001-0001-00001-0",
    "dense": "1-11-111-1111-11111-1",
}

# %%
for name, p in phases.items():
    rep = estimate_complexity(decode_network(parse_genome(" ".join([p] * 3), cfg), cfg))
    print(f"{name:>10}: nodes={rep.active_nodes:2d} edges={rep.active_connections:2d} "
          f"params={rep.params:>6} flops={rep.flops:>10}")

# %%
# Chain and dense tie: the cost is per node, and extra edges only sum
# inputs that are already there.

# %%
# Wider phases cost quadratically more.
wide = EncodingConfig(channel_width=64)
rep = estimate_complexity(decode_network(parse_genome(" ".join([phases["chain"]] * 3), wide), wide))
print("chain at width 64:", rep.params, rep.flops)

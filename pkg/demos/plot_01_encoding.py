"""
Reading a genome
================

A network is three phases of six convolution nodes. Each phase is a
16-bit string: node ``i`` gets ``i - 1`` bits saying which earlier nodes
feed it, and one final bit adds a skip path around the whole phase.
"""

import numpy as np

from phasenas import EncodingConfig, decode_network, format_genome, parse_genome, random_genome

cfg = EncodingConfig()
print(cfg)

# %%
# A plain chain: node 1 -> 2 -> ... -> 6, no skip. Groups are separated by
# dashes, phases by spaces.
chain = "1-01-001-0001-00001-0"
g = parse_genome(" ".join([chain] * 3), cfg)
arch = decode_network(g, cfg)
for pg, res in zip(arch.phase_graphs, arch.resolutions):
    print(res, sorted(pg.edges), "in", sorted(pg.input_attached), "out", sorted(pg.output_attached))

# %%
# Nodes without any connection drop out entirely. A phase with no active
# node passes its input straight through.
sparse = parse_genome("0-00-000-0000-00000-1 1-00-000-0000-00000-0 0-00-000-0000-00000-0", cfg)
for pg in decode_network(sparse, cfg).phase_graphs:
    print(sorted(pg.active_nodes), pg.skip, "pass-through" if pg.is_empty else "")

# %%
# Genomes are just bits, so random ones are cheap.
rng = np.random.default_rng(0)
bits = random_genome(rng, cfg).to_array()
print(bits.reshape(3, 16))
print(format_genome(random_genome(rng, cfg)))

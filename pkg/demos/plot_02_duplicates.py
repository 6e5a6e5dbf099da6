"""
Many strings, one network
=========================

Relabelling the nodes of a phase changes its bits but not the network it
describes. Canonical keys collapse such strings, and the census shows how
quickly the redundancy grows with the node count.
"""

from phasenas import canonical_phase, decode_phase, parse_phase, redundancy_census

# %%
# Two chains of two nodes built from different node ids.
a = parse_phase("1-00-000-0000-00000-0", 6)
b = parse_phase("0-00-000-0000-00001-0", 6)
print(sorted(decode_phase(a).edges), sorted(decode_phase(b).edges))
print("same key:", canonical_phase(a) == canonical_phase(b))

# %%
# A node-1 fan-out into nodes 2 and 3 against the same shape on 4, 5, 6.
fan = parse_phase("1-10-000-0000-00000-0", 6)
moved = parse_phase("0-00-000-0001-00010-0", 6)
print(canonical_phase(fan) == canonical_phase(moved))

# %%
# Full census up to five nodes (six takes a few seconds more).
print("n_o  total  unique  ratio")
for n in range(2, 6):
    total, unique = redundancy_census(n)
    print(f"{n:>3} {total:>6} {unique:>7}  {unique / total:.3f}")

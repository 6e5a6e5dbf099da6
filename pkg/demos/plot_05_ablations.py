"""
What each ingredient buys
=========================

Same seeds, same budget: the full search against pure random sampling and
against a variant without crossover. Hypervolumes are normalized over the
union of each pair so they are directly comparable.
"""

from phasenas import SearchConfig, paired_normalized_hv, run_random_search, run_search
from phasenas.engine import compare_exploitation_samplers

print("seed  search  random | crossover  none | model  uniform")
for seed in range(3):
    cfg = SearchConfig(seed=seed)
    full = run_search(cfg)
    rand = run_random_search(cfg, budget=len(full.archive))
    plain = run_search(cfg.replace(disable_crossover=True))
    s, r = paired_normalized_hv(full.archive.objectives(), rand.archive.objectives())
    x, n = paired_normalized_hv(full.archive.objectives(), plain.archive.objectives())
    m, u = compare_exploitation_samplers(cfg)
    print(f"{seed:>4}  {s:.4f}  {r:.4f} |    {x:.4f} {n:.4f} | {m:.4f}  {u:.4f}")

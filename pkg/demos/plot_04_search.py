"""
A full search on the surrogate
==============================

Forty genomes, twenty generations of crossover and mutation, then ten of
sampling from a Bayesian network fitted to everything seen so far. The
surrogate error falls as connectivity rises, so the two objectives pull
against each other.
"""

from phasenas import SearchConfig, run_search

res = run_search(SearchConfig(seed=1))

# %%
# Hypervolume per generation, normalized by the final archive's range.
for row in res.trace:
    print(f"{row['generation']:>3} {row['stage']:<15} {row['normalized_hv']:.4f}")

# %%
# The final trade-off curve.
for rec in sorted(res.front, key=lambda r: r.objectives.complexity):
    print(f"{rec.objectives.error:.3f} {rec.objectives.complexity:>12.0f}  {rec.genome}")

print(res.archive.stage_counts(), "evaluations:", res.evaluations)

"""Ranking competing methods with the Friedman test and Nemenyi distances.

Given per-data-set scores for several methods, ranks are assigned per data
set (1 = best, ties averaged), the Friedman chi-square tests whether the
methods differ at all, and the Nemenyi critical distance groups methods
whose mean ranks are statistically indistinguishable. The diagram data is
plain text, ready for external plotting.
"""

from dtmbo import compare_methods, format_rank_diagram, rank_diagram_data

# Mean scores of five methods over six data sets (higher is better).
scores = {
    "threshold-mbo": {"d1": 0.978, "d2": 0.866, "d3": 0.785, "d4": 0.792, "d5": 0.974, "d6": 0.978},
    "baseline-lr":   {"d1": 0.960, "d2": 0.820, "d3": 0.760, "d4": 0.769, "d5": 0.959, "d6": 0.979},
    "baseline-rf":   {"d1": 0.940, "d2": 0.810, "d3": 0.700, "d4": 0.730, "d5": 0.930, "d6": 0.950},
    "baseline-xgb":  {"d1": 0.945, "d2": 0.800, "d3": 0.690, "d4": 0.720, "d5": 0.940, "d6": 0.955},
    "baseline-gb":   {"d1": 0.920, "d2": 0.700, "d3": 0.650, "d4": 0.700, "d5": 0.910, "d6": 0.930},
}

table = compare_methods(scores, alpha=0.05)
print("mean ranks (1 = best):")
for method, rank in sorted(zip(table.methods, table.mean_ranks), key=lambda x: x[1]):
    print(f"  {rank:.3f}  {method}")
print(f"\nFriedman chi-square {table.chi_sq:.3f}, p-value {table.p_value:.4g}")
print(f"Nemenyi critical distance {table.critical_distance:.3f} at alpha 0.05")

diagram = rank_diagram_data(table)
print("\nrank diagram data:")
print(format_rank_diagram(diagram))

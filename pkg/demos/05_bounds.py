"""
Bound ratios and empirical constants
====================================

A YAML sweep is evaluated for every family and metric. Each row holds
LHS / RHS with the constant left out; the estimate is the largest ratio
over rows whose hypotheses hold.
"""

from pathlib import Path

from depapprox.harness import ExperimentConfig, estimate_constant, evaluate_bounds

config = ExperimentConfig.from_file(Path(__file__).with_name("sweep.yaml"))
report = evaluate_bounds(config)
print(f"{len(report.rows)} rows, {len(report.skipped)} inadmissible family/point pairs")

for (family, metric), est in sorted(estimate_constant(report.rows).items()):
    where = f"n={est.row.params.get('n')}" if est.row else "-"
    print(f"{family:9s} {metric:12s} {est.value:8.4f}  from {est.n_rows:2d} rows, max at {where}")

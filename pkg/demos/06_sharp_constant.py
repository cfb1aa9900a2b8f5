"""
The Poisson binomial Wasserstein constant
=========================================

For equal small p the scaled distance sqrt(lam) / lam2 * W approaches
1 / sqrt(2 pi).
"""

from depapprox.harness import SHARP_CONSTANT, sharp_constant_experiment

print(f"target {SHARP_CONSTANT:.6f}")
for row in sharp_constant_experiment([1000, 2000, 4000, 8000, 16000], 0.005):
    print(f"n={row.n:6d}  lambda={row.lam:6.1f}  value={row.value:.6f}  deviation={row.deviation:.2e}")

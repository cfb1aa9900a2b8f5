"""
Exact laws of 1-dependent sums
==============================

Models are functionals of a hidden Bernoulli chain. Their sum law is
computed exactly by dynamic programming and checked against enumeration.
"""

from depapprox.measures import max_abs_diff
from depapprox.models import brute_force_sum, exact_sum_distribution, k1k2_events_model, two_runs_model

# X_k = eta_k * eta_{k+1} counts adjacent pairs of successes
runs = two_runs_model(3, 0.5)
print("two runs, n=3, p=1/2:", exact_sum_distribution(runs).weights * 16)

# (1,1)-events: a failure immediately followed by a success
events = k1k2_events_model(6, 1, 1, 0.5)
print("(1,1)-events, n=6:   ", exact_sum_distribution(events).weights * 64)

# the DP and the enumeration oracle agree to rounding
big = two_runs_model(18, 0.3)
print("DP vs enumeration:", max_abs_diff(exact_sum_distribution(big), brute_force_sum(big)))

# the DP scales far past enumeration
law = exact_sum_distribution(two_runs_model(20_000, 0.02))
print("n=20000 mean", law.mean(), "variance", law.variance())

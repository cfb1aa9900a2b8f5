"""
Distances between an exact law and its approximations
=====================================================

The non-uniform metrics weight the discrepancy at x by 1 + (x - lam)^2 / lam.
"""

from depapprox.errors import ParameterDomainError
from depapprox.measures import FAMILIES, FamilyParams, build_family
from depapprox.metrics import nonuniform_kolmogorov, nonuniform_local, total_variation, wasserstein_norm
from depapprox.models import exact_sum_distribution, two_runs_model
from depapprox.moments import summarize

model = two_runs_model(2000, 0.05)
s = summarize(model)
exact = exact_sum_distribution(model)
print(f"lambda {s.lam:.4f}  gamma2 {s.gamma2:.4f}")
print(f"{'family':9s} {'nu-Kolm':>10s} {'nu-local':>10s} {'TV':>10s} {'Wass':>10s}")
for name in FAMILIES:
    try:
        approx = build_family(name, FamilyParams(s.lam, s.gamma2))
    except ParameterDomainError as exc:
        print(f"{name:9s} inadmissible: {exc}")
        continue
    print(f"{name:9s} {nonuniform_kolmogorov(exact, approx, s.lam).value:10.2e}"
          f" {nonuniform_local(exact, approx, s.lam).value:10.2e}"
          f" {total_variation(exact, approx).value:10.2e}"
          f" {wasserstein_norm(exact, approx).value:10.2e}")

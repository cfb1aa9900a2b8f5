"""
Moment parameters and remainders
================================

``summarize`` returns lambda, gamma2, the remainders R0 and R1 and the
hypothesis checks, all from factorial and mixed moments of the summands.
"""

from depapprox.models import k1k2_events_model, poisson_binomial_model, two_runs_model
from depapprox.moments import summarize

for model in (
    poisson_binomial_model([0.01, 0.02, 0.03] * 100),
    two_runs_model(1000, 0.05),
    k1k2_events_model(2000, 2, 2, 0.05),
):
    s = summarize(model)
    print(model.describe()["kind"], f"with {model.n} summands")
    print(f"  lambda {s.lam:.6f}  gamma2 {s.gamma2:+.6f}  R0 {s.r0:.3e}  R1 {s.r1:.3e}  c0 {s.c0}")
    print("  failed conditions:", s.conditions.failed() or "none")

# closed forms for the runs model
model = two_runs_model(1000, 0.05)
print("closed form:", model.closed_form)

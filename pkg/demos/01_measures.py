"""
Signed measures and the six approximating families
==================================================

Every distribution in the package is a ``SignedMeasure``: an integer
offset plus a weight vector. Families are built from ``(lambda, gamma2)``.
"""

from depapprox.errors import ParameterDomainError
from depapprox.measures import FAMILIES, FamilyParams, build_family, family_cf, invert_cf, max_abs_diff

# a negative gamma2 makes the compound measure signed
params = FamilyParams(lam=6.0, gamma2=-0.8)
for name in FAMILIES:
    try:
        m = build_family(name, params)
    except ParameterDomainError as exc:
        print(f"{name:9s} inadmissible: {exc}")
        continue
    print(f"{name:9s} support [{m.lo:3d}, {m.hi:3d}]  mass {m.total_mass():.12f}"
          f"  mean {m.mean():8.5f}  nonnegative {m.is_nonnegative()}")

# the same compound measure recovered from its transform by FFT
g = build_family("compound", params)
inv = invert_cf(family_cf("compound", params), 4096, min_index=min(g.lo, 0))
print("recursion vs inversion:", max_abs_diff(g, inv))

# translated Poisson may start below zero
tp = build_family("tp", FamilyParams(2.0, 1.25))
for k, w in zip(tp.support[:3], tp.weights[:3]):
    print(f"tp mass at {int(k):+d}: {w:.6f}")

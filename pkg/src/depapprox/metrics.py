"""Discrepancies between a distribution and its approximation.

The non-uniform metrics multiply the pointwise error by
``1 + (x - lam)**2 / lam``. Sup-type metrics scan the union of both
supports plus one sentinel point on each side; beyond that both cdfs are
constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergenceError
from .measures import SignedMeasure, _aligned

__all__ = [
    "DiscrepancyResult",
    "nonuniform_weight",
    "nonuniform_kolmogorov",
    "nonuniform_local",
    "kolmogorov",
    "total_variation",
    "wasserstein_norm",
    "MASS_TOL",
]

MASS_TOL = 1e-9


@dataclass(frozen=True)
class DiscrepancyResult:
    """Value of a discrepancy, where it is attained and the truncation residual."""

    value: float
    argmax_x: Optional[int] = None
    truncation_error_bound: float = 0.0

    def __float__(self):
        return float(self.value)


def nonuniform_weight(x, lam: float):
    x = np.asarray(x, dtype=np.float64)
    return 1.0 + (x - lam) ** 2 / lam


def _cdf_gap(f: SignedMeasure, a: SignedMeasure):
    lo, wf, wa = _aligned(f, a, pad=1)
    x = np.arange(lo, lo + wf.size)
    return x, np.cumsum(wf - wa), wf - wa


def nonuniform_kolmogorov(
    f: SignedMeasure, a: SignedMeasure, lam: float, *, weighted: bool = True, mass_tol: float = MASS_TOL
) -> DiscrepancyResult:
    """``sup_x (1 + (x - lam)**2 / lam) |F(x) - A(x)|`` over the integers.

    If the total masses differ by more than ``mass_tol`` the weighted
    supremum is infinite and ``value`` is ``inf``; otherwise the mass gap is
    reported as ``truncation_error_bound``. With ``weighted=False`` this is
    the Kolmogorov distance.
    """
    if weighted and not lam > 0:
        raise ValueError("lambda must be positive")
    x, gap, _ = _cdf_gap(f, a)
    mass_gap = abs(gap[-1])
    if weighted and mass_gap > mass_tol:
        return DiscrepancyResult(math.inf, None, mass_gap)
    vals = np.abs(gap) * nonuniform_weight(x, lam) if weighted else np.abs(gap)
    i = int(np.argmax(vals))
    return DiscrepancyResult(float(vals[i]), int(x[i]), mass_gap)


def kolmogorov(f: SignedMeasure, a: SignedMeasure) -> DiscrepancyResult:
    """``sup_x |F(x) - A(x)|``."""
    return nonuniform_kolmogorov(f, a, 1.0, weighted=False)


def nonuniform_local(f: SignedMeasure, a: SignedMeasure, lam: float) -> DiscrepancyResult:
    """``sup_x (1 + (x - lam)**2 / lam) |f{x} - a{x}|``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    x, _, diff = _cdf_gap(f, a)
    vals = np.abs(diff) * nonuniform_weight(x, lam)
    i = int(np.argmax(vals))
    return DiscrepancyResult(float(vals[i]), int(x[i]), 0.0)


def total_variation(f: SignedMeasure, a: SignedMeasure) -> DiscrepancyResult:
    """The l1 norm ``sum_x |f{x} - a{x}|``.

    For probability laws this is twice the usual total variation distance.
    """
    _, _, diff = _cdf_gap(f, a)
    return DiscrepancyResult(math.fsum(np.abs(diff)), None, 0.0)


def wasserstein_norm(f: SignedMeasure, a: SignedMeasure, *, mass_tol: float = MASS_TOL) -> DiscrepancyResult:
    """``sum_x |F(x) - A(x)|``, the l1 norm of the cdf gap.

    Raises
    ------
    DivergenceError
        If the total masses differ by more than ``mass_tol``; the sum over all
        integers would then diverge.
    """
    x, gap, _ = _cdf_gap(f, a)
    mass_gap = abs(gap[-1])
    if mass_gap > mass_tol:
        raise DivergenceError(f"total masses differ by {mass_gap:.3e}; Wasserstein norm diverges")
    # the final sentinel carries only the mass gap, which is reported separately
    vals = np.abs(gap[:-1])
    i = int(np.argmax(vals))
    return DiscrepancyResult(math.fsum(vals), int(x[i]), mass_gap)
